//! Matrix-free application of the linearized operator `L = L_1 + L_2` and
//! the bilinear collision operator `Q`.

mod collision;
mod convolution;
mod fft;
mod linear;

pub use collision::apply_q;
pub use convolution::ConvolutionEngine;
pub use linear::{
    apply_diffusion, apply_l, apply_l1, apply_l2, collision_invariants, remove_invariants, LandauOperator, OperatorMode,
};
