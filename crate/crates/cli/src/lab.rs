//! Everything a command needs for one configuration: the coefficient set
//! (cached on disk), the reference trajectory and the suite runners.

use std::path::{Path, PathBuf};

use log::info;

use landau_core::evolution::{derivative_ladder, evolve, DerivativeLadder, TimePolicy, Trajectory};
use landau_core::io::{cache_file_name, load_coefficients, save_coefficients};
use landau_core::kernel::{tabulate_fft_kernels, LandauCoefficients};
use landau_core::operator::{ConvolutionEngine, LandauOperator};
use landau_core::verify::{
    check_coefficient_bounds, check_convolution_bound, check_energy, check_kernel_identities, check_l3_embedding,
    check_smoothing, estimate_bilinear_constants, estimate_coercivity, recheck_bilinear, relative_change,
    smoothing_fit, Check, Ensemble, SmoothingFit, VerificationReport,
};
use landau_core::Result;

use crate::config::{RunConfig, Suite};

/// Allowed relative change of `C1` under grid refinement.
pub const COERCIVITY_STABILITY_TOL: f64 = 0.20;
/// Allowed relative change of the bilinear and smoothing constants.
pub const CONSTANT_STABILITY_TOL: f64 = 0.25;

/// Constants whose refinement stability is asserted, with tolerances.
pub const STABILITY_CHECKED: [(&str, f64); 8] = [
    ("C1", COERCIVITY_STABILITY_TOL),
    ("C2", CONSTANT_STABILITY_TOL),
    ("C3", CONSTANT_STABILITY_TOL),
    ("C4", CONSTANT_STABILITY_TOL),
    ("K_L3", CONSTANT_STABILITY_TOL),
    ("K_conv", CONSTANT_STABILITY_TOL),
    ("K_coef", CONSTANT_STABILITY_TOL),
    ("C", CONSTANT_STABILITY_TOL),
];

/// Re-checked on the fresh ensemble.
const RECHECKED: [&str; 6] = ["C2", "C3", "C4", "K_grad", "C_eps1", "K_L3"];

pub struct Lab {
    pub cfg: RunConfig,
    pub op: LandauOperator,
    pub cache_path: Option<PathBuf>,
    pub cache_hit: bool,
    reference: Option<Trajectory>,
}

impl Lab {
    /// Loads the coefficients from `cache_dir` when present, computes and
    /// stores them otherwise. `None` disables the cache.
    pub fn open(cfg: RunConfig, cache_dir: Option<&Path>) -> Result<Lab> {
        let grid = cfg.velocity_grid();
        let params = cfg.kernel_params();
        let quad = cfg.quadrature_spec();
        let cache_path = cache_dir.map(|d| d.join(cache_file_name(&grid, &params, &quad)));
        let mut cache_hit = false;
        let coeffs = match &cache_path {
            Some(p) if p.exists() => {
                let c = load_coefficients(p, cfg.conv.pad)?;
                info!("coefficient cache hit: {}", p.display());
                cache_hit = true;
                c
            }
            _ => {
                let c = LandauCoefficients::compute(&grid, &params, &quad, cfg.conv.pad)?;
                if let Some(p) = &cache_path {
                    save_coefficients(p, &c)?;
                    info!("coefficient cache written: {}", p.display());
                }
                c
            }
        };
        Ok(Lab {
            cfg,
            op: LandauOperator::new(coeffs),
            cache_path,
            cache_hit,
            reference: None,
        })
    }

    pub fn coeffs(&self) -> &LandauCoefficients {
        self.op.coeffs()
    }

    fn report(&self, suite: &str) -> VerificationReport {
        let mut r = VerificationReport::new(suite);
        r.config_fingerprint = self.cfg.fingerprint();
        r
    }

    /// The configured run: random datum, configured source, horizon `T`.
    pub fn reference_run(&mut self) -> Result<&Trajectory> {
        if self.reference.is_none() {
            let grid = self.cfg.velocity_grid();
            let f0 = self.cfg.initial_field(grid)?;
            let model = self.cfg.source_model(grid)?;
            let policy = TimePolicy {
                safety: self.cfg.time.safety,
                refine: 1,
            };
            let times = self.cfg.all_snapshot_times();
            info!("evolving to T = {} on N = {}", self.cfg.time.horizon, grid.n());
            let tr = evolve(f0, &model, self.cfg.time.horizon, &policy, &times, &self.op)?;
            info!("{} steps of dt = {:.4e}", tr.state.step_index, tr.dt);
            self.reference = Some(tr);
        }
        Ok(self.reference.as_ref().expect("just set"))
    }

    pub fn ladders(&mut self) -> Result<Vec<DerivativeLadder>> {
        let grid = self.cfg.velocity_grid();
        let model = self.cfg.source_model(grid)?;
        let kmax = self.cfg.ladder.kmax;
        let times = self.cfg.ladder.eval_times.clone();
        let op = self.op.clone();
        let tr = self.reference_run()?;
        times
            .iter()
            .map(|&t| {
                let f = tr.snapshot_at(t).expect("ladder times are snapshot times");
                derivative_ladder(f, t, kmax, &model, &op)
            })
            .collect()
    }

    /// Self-check of the coefficient set.
    pub fn coefficient_self_check(&self) -> VerificationReport {
        let c = self.coeffs();
        let mut r = self.report("coeffs");
        r.push(Check::at_most("c2_cross_check", c.c2_relative_difference(), c.c2_tolerance()));
        let c1_min = c.c1().iter().cloned().fold(f64::INFINITY, f64::min);
        r.push(Check::at_least("c1_min", c1_min, 0.0));
        r.push(Check::at_least(
            "abar_min_relative_eigenvalue",
            c.abar().min_relative_eigenvalue(),
            -1e-12,
        ));
        r.push(Check::finite("abar_max_eigenvalue", c.max_abar_eigenvalue()));
        r
    }

    pub fn run_suite(&mut self, suite: Suite) -> Result<VerificationReport> {
        let grid = self.cfg.velocity_grid();
        let v = self.cfg.verify.clone();
        let mut report = self.report(suite.name());
        match suite {
            Suite::Kernel => {
                report.merge(check_kernel_identities(&self.cfg.kernel_params(), v.identity_samples, v.seed)?);
            }
            Suite::Coefficients => {
                report.merge(self.coefficient_self_check());
                report.merge(check_coefficient_bounds(self.coeffs())?);
                let padded = ConvolutionEngine::new(tabulate_fft_kernels(&grid, &self.cfg.kernel_params(), 2));
                report.merge(check_convolution_bound(&padded, &self.cfg.kernel_params(), &v.conv_deltas)?);
            }
            Suite::Coercivity => {
                let ens = Ensemble::with_probes(grid, v.seed, v.ensemble_size, self.cfg.field_profile())?;
                let est = estimate_coercivity(self.coeffs(), &ens)?;
                report.push(Check::at_least("C1_positive", est.sample_min, f64::MIN_POSITIVE));
                report.push(Check::at_most("C1_descent_consistent", est.descent_min, est.sample_min));
                report.constants.extend(est.constants(&grid));
            }
            Suite::Bilinear => {
                let ens = Ensemble::with_probes(grid, v.seed, v.ensemble_size, self.cfg.field_profile())?;
                let consts = estimate_bilinear_constants(&self.op, &ens)?;
                let (k_l3, _) = check_l3_embedding(self.coeffs(), &ens)?;
                let mut measured = consts.constants(&grid);
                measured.push(k_l3);
                for c in &measured {
                    report.push(Check::finite(c.name.clone(), c.value));
                }
                let fresh_ens = Ensemble::random(grid, v.fresh_seed, v.ensemble_size, self.cfg.field_profile())?;
                let mut fresh = estimate_bilinear_constants(&self.op, &fresh_ens)?.constants(&grid);
                fresh.push(check_l3_embedding(self.coeffs(), &fresh_ens)?.0);
                let keep = |c: &&landau_core::verify::ConstantEstimate| RECHECKED.contains(&c.name.as_str());
                let m: Vec<_> = measured.iter().filter(keep).cloned().collect();
                for check in recheck_bilinear(&m, &fresh, v.slack) {
                    report.push(check);
                }
                report.constants.extend(measured);
            }
            Suite::Energy => {
                let horizon = v.halving_horizon;
                let f0 = self.cfg.initial_field(grid)?;
                let model = self.cfg.source_model(grid)?;
                let halving = (0..v.halving_levels)
                    .map(|l| {
                        let policy = TimePolicy {
                            safety: self.cfg.time.safety,
                            refine: 1 << l,
                        };
                        evolve(f0.clone(), &model, horizon, &policy, &[], &self.op)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let tr = self.reference_run()?;
                report.merge(check_energy(tr, &halving)?);
            }
            Suite::Smoothing => {
                let fit = self.smoothing()?;
                report.merge(check_smoothing(&fit, &grid));
            }
        }
        Ok(report)
    }

    pub fn smoothing(&mut self) -> Result<SmoothingFit> {
        smoothing_fit(&self.ladders()?)
    }
}

/// Records the relative change of every constant of `fine` that also
/// appears in `coarse`, and asserts it for [`STABILITY_CHECKED`].
pub fn add_stability(fine: &mut VerificationReport, coarse: &VerificationReport) {
    let mut checks = Vec::new();
    for c in fine.constants.iter_mut() {
        if let Some(old) = coarse.constant(&c.name) {
            let s = c.compare(old);
            if let Some((_, tol)) = STABILITY_CHECKED.iter().find(|(n, _)| *n == c.name) {
                checks.push(Check::at_most(format!("stability_{}", c.name), s, *tol));
            }
        }
    }
    for c in checks {
        fine.push(c);
    }
}

/// `|fine - coarse| / |coarse|` of a named constant, when both have it.
pub fn constant_change(fine: &VerificationReport, coarse: &VerificationReport, name: &str) -> Option<f64> {
    Some(relative_change(fine.constant(name)?.value, coarse.constant(name)?.value))
}
