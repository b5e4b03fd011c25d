//! Mesh refinement studies against a fine-mesh reference.

use super::presets::TestCase;
use super::{prepare, ErrorReport, Prepared};
use crate::error::{Error, Result};
use crate::model::State;
use crate::scheme::SchemeConfig;

/// Block averages of `fine` onto `coarse` cells; the ratio must be an integer.
pub fn restrict(fine: &[State], coarse: usize) -> Result<Vec<State>> {
    if coarse == 0 || fine.len() % coarse != 0 {
        return Err(Error::Mesh(format!("cannot restrict {} cells onto {coarse}", fine.len())));
    }
    let r = fine.len() / coarse;
    Ok(fine
        .chunks(r)
        .map(|c| c.iter().fold(State::ZERO, |s, w| s + *w) * (1.0 / r as f64))
        .collect())
}

/// `log2(e_coarse / e_fine)`; `None` when either error is zero.
pub fn fitted_order(e_coarse: f64, e_fine: f64) -> Option<f64> {
    (e_coarse > 0.0 && e_fine > 0.0).then(|| (e_coarse / e_fine).log2())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub errors: ErrorReport,
    /// Orders relative to the previous (coarser) row.
    pub order_area: Option<f64>,
    pub order_velocity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub reference_cells: usize,
    pub rows: Vec<ConvergenceRow>,
}

fn run_to_end(case: &TestCase, cells: usize, config: SchemeConfig) -> Result<Prepared> {
    let mut c = case.clone();
    c.cells = cells;
    let mut p = prepare(&c, config)?;
    p.run(|_| {})?;
    Ok(p)
}

/// Runs `case` with `config` on every mesh in `meshes` and compares with the
/// order-3 well-balanced solution on `reference_cells`, restricted by averaging.
pub fn convergence_study(
    case: &TestCase,
    config: SchemeConfig,
    meshes: &[usize],
    reference_cells: usize,
) -> Result<ConvergenceStudy> {
    if meshes.iter().any(|&n| n >= reference_cells) {
        return Err(Error::Config("the reference mesh must be strictly finer than every study mesh".into()));
    }
    let reference_config = SchemeConfig { order: 3, well_balanced: true, cfl: config.cfl };
    let reference = run_to_end(case, reference_cells, reference_config)?;
    study_with_reference(case, config, meshes, &reference.sim.averages)
}

/// As [`convergence_study`] with a precomputed reference (physical cells, nondimensional).
pub fn study_with_reference(
    case: &TestCase,
    config: SchemeConfig,
    meshes: &[usize],
    reference: &[State],
) -> Result<ConvergenceStudy> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(meshes.len());
    for &n in meshes {
        let p = run_to_end(case, n, config)?;
        let errors = p.errors_against(&restrict(reference, n)?)?;
        let (order_area, order_velocity) = match rows.last() {
            Some(prev) => (
                fitted_order(prev.errors.area_ratio, errors.area_ratio),
                fitted_order(prev.errors.velocity, errors.velocity),
            ),
            None => (None, None),
        };
        rows.push(ConvergenceRow { cells: n, errors, order_area, order_velocity });
    }
    Ok(ConvergenceStudy { reference_cells: reference.len(), rows })
}
