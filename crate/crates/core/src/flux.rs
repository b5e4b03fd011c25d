//! HLL numerical flux and generalized hydrostatic reconstruction (GHR) fluctuations.

use crate::error::Result;
use crate::model::{Branch, Model, State};
use crate::properties::Sigma;
use crate::reconstruction::FLUCT_SNAP;

/// States equal up to the rounding left by the stationary solvers.
pub fn nearly_equal(wl: &State, wr: &State) -> bool {
    (wl.a - wr.a).abs() <= FLUCT_SNAP * wl.a.abs().max(wr.a.abs())
        && (wl.q - wr.q).abs() <= FLUCT_SNAP * (wl.q.abs() + wr.q.abs())
}

const ZERO_FLUCTUATIONS: Fluctuations = Fluctuations { minus: State::ZERO, plus: State::ZERO, fallback: false };

/// Path-conservative fluctuations `D-` (to the left cell) and `D+` (to the right cell).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Fluctuations {
    pub minus: State,
    pub plus: State,
    /// Set when the GHR ladder failed and the degenerate fallback was used.
    pub fallback: bool,
}

/// Wave speed estimates `S_l = min(l1(W_l), l5(W_r))`, `S_r = max(l1(W_l), l5(W_r))`.
pub fn wave_estimates(model: &Model, wl: &State, sl: &Sigma, wr: &State, sr: &Sigma) -> Result<(f64, f64)> {
    let (l1, _) = model.eigenvalues(wl, sl)?;
    let (_, l5) = model.eigenvalues(wr, sr)?;
    Ok((l1.min(l5), l1.max(l5)))
}

/// HLL flux between two states with the same property vector `s`.
pub fn hll_flux(model: &Model, wl: &State, wr: &State, s: &Sigma) -> Result<State> {
    let fl = model.flux(wl, s)?;
    if wl == wr {
        return Ok(fl);
    }
    let fr = model.flux(wr, s)?;
    let (sl, sr) = wave_estimates(model, wl, s, wr, s)?;
    if sl >= 0.0 {
        return Ok(fl);
    }
    if sr <= 0.0 {
        return Ok(fr);
    }
    Ok((fl * sr - fr * sl + (*wr - *wl) * (sl * sr)) * (1.0 / (sr - sl)))
}

/// Candidate intermediate property vectors in the order they are tried.
pub fn sigma0_candidates(model: &Model, wl: &State, sl: &Sigma, wr: &State, sr: &Sigma) -> Result<[Sigma; 3]> {
    let mid = sl.midpoint(sr);
    let gl = model.energy(wl, sl)? - sl.pe;
    let gr = model.energy(wr, sr)? - sr.pe;
    Ok(if gl >= gr { [mid, *sl, *sr] } else { [mid, *sr, *sl] })
}

/// Hydrostatic states `W0-`, `W0+` at `sigma0`: same flow rates and energies
/// as `W_l`, `W_r`, each on its own branch.
pub fn hydrostatic_states(
    model: &Model,
    wl: &State,
    sl: &Sigma,
    wr: &State,
    sr: &Sigma,
    s0: &Sigma,
) -> Result<(State, State)> {
    let side = |w: &State, s: &Sigma| -> Result<State> {
        if s == s0 {
            return Ok(*w);
        }
        let gamma = model.energy(w, s)?;
        let branch: Branch = model.branch(w, s)?;
        let a = model.area_for_energy(w.q, s0, gamma, branch, Some(w.a * s0.a0 / s.a0))?;
        Ok(State::new(a, w.q))
    };
    Ok((side(wl, sl)?, side(wr, sr)?))
}

/// GHR fluctuations at an interface with left data `(W_l, sigma_l)` and right data `(W_r, sigma_r)`.
pub fn ghr_fluctuations(model: &Model, wl: &State, sl: &Sigma, wr: &State, sr: &Sigma) -> Result<Fluctuations> {
    if sl == sr {
        if nearly_equal(wl, wr) {
            return Ok(ZERO_FLUCTUATIONS);
        }
        let f = hll_flux(model, wl, wr, sl)?;
        return Ok(Fluctuations {
            minus: f - model.flux(wl, sl)?,
            plus: model.flux(wr, sr)? - f,
            fallback: false,
        });
    }
    for s0 in sigma0_candidates(model, wl, sl, wr, sr)? {
        if let Ok((w0l, w0r)) = hydrostatic_states(model, wl, sl, wr, sr, &s0) {
            if nearly_equal(&w0l, &w0r) {
                return Ok(ZERO_FLUCTUATIONS);
            }
            let f = hll_flux(model, &w0l, &w0r, &s0)?;
            return Ok(Fluctuations {
                minus: f - model.flux(&w0l, &s0)?,
                plus: model.flux(&w0r, &s0)? - f,
                fallback: false,
            });
        }
    }
    degenerate_fluctuations(model, wl, sl, wr, sr)
}

/// Plain HLL fluctuations with the nonconservative product lumped at the midpoint.
fn degenerate_fluctuations(model: &Model, wl: &State, sl: &Sigma, wr: &State, sr: &Sigma) -> Result<Fluctuations> {
    log::warn!("hydrostatic reconstruction failed; using degenerate HLL fluctuations");
    let smid = sl.midpoint(sr);
    let wmid = (*wl + *wr) * 0.5;
    let jump = Sigma { k: sr.k - sl.k, a0: sr.a0 - sl.a0, pe: sr.pe - sl.pe };
    let nc = model.nonconservative_source(&wmid, &smid, &jump)?;
    let fl = model.flux(wl, sl)?;
    let fr = model.flux(wr, sr)?;
    let (sl_w, sr_w) = wave_estimates(model, wl, sl, wr, sr)?;
    let f = if sl_w >= 0.0 {
        fl
    } else if sr_w <= 0.0 {
        fr
    } else {
        (fl * sr_w - fr * sl_w + (*wr - *wl) * (sl_w * sr_w)) * (1.0 / (sr_w - sl_w))
    };
    Ok(Fluctuations { minus: f - fl + nc * 0.5, plus: fr - f + nc * 0.5, fallback: true })
}
