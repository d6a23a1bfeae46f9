//! Batch execution of pipeline runs over a parameter grid. Runs are
//! independent, so the batch maps over them in parallel when the `parallel`
//! feature is enabled; `sweep_serial` is always available and produces
//! identical results in the same order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::instance::gen_instance;
use crate::iteration::{run, IterationConfig};
use crate::lift::PhaseMode;

/// One grid point: a seeded instance and the run parameters applied to it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub seed: u64,
    pub k_size: usize,
    pub s_size: usize,
    pub rho: f64,
    pub r: f64,
}

/// Options shared by every run of a sweep.
#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub norm_scale: f64,
    pub mode: PhaseMode,
    pub defect_tol: f64,
    pub max_iter: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            norm_scale: 1.0,
            mode: PhaseMode::Exact,
            defect_tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepStatus {
    Pass,
    Partial,
    Failed(String),
}

/// One row of the aggregate sweep result.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub steps: usize,
    pub distance: f64,
    pub defect: f64,
    pub eps_final: f64,
    pub status: SweepStatus,
}

/// Cartesian product of the parameter lists, in deterministic order.
pub fn expand_grid(
    seeds: &[u64],
    sizes: &[(usize, usize)],
    rhos: &[f64],
    rs: &[f64],
) -> Vec<SweepPoint> {
    let mut points = Vec::with_capacity(seeds.len() * sizes.len() * rhos.len() * rs.len());
    for &seed in seeds {
        for &(k_size, s_size) in sizes {
            for &rho in rhos {
                for &r in rs {
                    points.push(SweepPoint {
                        seed,
                        k_size,
                        s_size,
                        rho,
                        r,
                    });
                }
            }
        }
    }
    points
}

fn run_point(point: &SweepPoint, opts: &SweepOptions) -> SweepRow {
    let attempt = || -> crate::error::Result<(usize, f64, f64, f64, bool)> {
        let instance = gen_instance(point.seed, point.k_size, point.s_size, opts.norm_scale)?;
        let field = instance.to_field()?;
        let mut config = IterationConfig::new(point.rho);
        config.r = point.r;
        config.mode = opts.mode;
        config.defect_tol = opts.defect_tol;
        config.max_iter = opts.max_iter;
        let out = run(&field, &config)?;
        let cert = out.certificate;
        Ok((
            cert.steps,
            cert.distance,
            cert.defect,
            cert.eps_final,
            cert.passed(),
        ))
    };
    match attempt() {
        Ok((steps, distance, defect, eps_final, passed)) => SweepRow {
            point: point.clone(),
            steps,
            distance,
            defect,
            eps_final,
            status: if passed {
                SweepStatus::Pass
            } else {
                SweepStatus::Partial
            },
        },
        Err(e) => SweepRow {
            point: point.clone(),
            steps: 0,
            distance: f64::NAN,
            defect: f64::NAN,
            eps_final: f64::NAN,
            status: SweepStatus::Failed(e.to_string()),
        },
    }
}

/// Runs every grid point sequentially.
pub fn sweep_serial(points: &[SweepPoint], opts: &SweepOptions) -> Vec<SweepRow> {
    points.iter().map(|p| run_point(p, opts)).collect()
}

/// Runs every grid point, in parallel when the `parallel` feature is
/// enabled. Results keep grid order regardless of scheduling.
#[cfg(feature = "parallel")]
pub fn sweep(points: &[SweepPoint], opts: &SweepOptions) -> Vec<SweepRow> {
    points.par_iter().map(|p| run_point(p, opts)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn sweep(points: &[SweepPoint], opts: &SweepOptions) -> Vec<SweepRow> {
    sweep_serial(points, opts)
}
