//! Truncation regions by homotopy continuation along the line `y(z)`.
//!
//! The walk starts at `z_lo`, runs the selector just right of the current
//! breakpoint, characterises the whole interval on which that run's
//! over-conditioned event holds, and jumps to its right end. Every visited
//! interval is kept together with what the selector produced there, so a
//! single walk answers all conditioning modes at once.

mod forward;
mod line;
mod stepwise;

use crate::error::{Error, Result};
use crate::model::{Interval, Region};
use crate::real::Real;

pub use forward::{compute_truncation_region_sfs, polytope_interval, trace_sfs, SfsReference};
pub(crate) use forward::{forward_interval, trace_forward};
pub use line::{test_direction, LineParam};
pub use stepwise::{compute_truncation_region_fbsfs, history_region, trace_fbsfs};

/// Walk range, seeding offset and slope tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomotopyConfig<T> {
    pub z_lo: T,
    pub z_hi: T,
    pub delta_z: T,
    pub endpoint_tol: T,
}

/// Default slope threshold below which a linear constraint is constant.
pub const ENDPOINT_TOL: f64 = 1e-12;

/// Halvings of the seeding offset tried before a walk gives up.
const MAX_HALVINGS: usize = 40;

impl<T: Real> HomotopyConfig<T> {
    pub fn new(z_lo: T, z_hi: T, delta_z: T, endpoint_tol: T) -> Result<Self> {
        let cfg = HomotopyConfig { z_lo, z_hi, delta_z, endpoint_tol };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default range `+-max((|z| + 10) sd, |z| + 10 sd)` with
    /// `delta_z = min(1e-4 sd, 1e-3 * range)`.
    pub fn for_line(lp: &LineParam<T>) -> Self {
        let sd = lp.sd();
        let ten = T::lit(10.0);
        let z = lp.z_obs.abs();
        let half = ((z + ten) * sd).max(z + ten * sd);
        let delta_z = (T::lit(1e-4) * sd).min(T::lit(1e-3) * (half + half));
        HomotopyConfig { z_lo: -half, z_hi: half, delta_z, endpoint_tol: T::lit(ENDPOINT_TOL) }
    }

    pub fn validate(&self) -> Result<()> {
        let width = self.z_hi - self.z_lo;
        if !(self.z_lo.is_finite() && self.z_hi.is_finite() && width > T::zero()) {
            return Err(Error::InvalidConfig(format!("need finite z_lo < z_hi, got [{}, {}]", self.z_lo, self.z_hi)));
        }
        if !(self.delta_z > T::zero() && self.delta_z < width / T::lit(100.0)) {
            return Err(Error::InvalidConfig(format!("delta_z={} must lie in (0, (z_hi - z_lo)/100)", self.delta_z)));
        }
        if !(self.endpoint_tol >= T::zero()) {
            return Err(Error::InvalidConfig("endpoint_tol must be non-negative".into()));
        }
        Ok(())
    }
}

/// One processed interval of a walk together with the selector output
/// realised on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<T, L> {
    pub lo: T,
    pub hi: T,
    pub label: L,
}

/// Output of a homotopy walk: consecutive segments tiling at least
/// `[z_lo, z_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk<T, L> {
    pub segments: Vec<Segment<T, L>>,
}

impl<T: Real, L> Walk<T, L> {
    /// Union of the segments whose label satisfies `pred`.
    pub fn region_where(&self, mut pred: impl FnMut(&L) -> bool) -> Region<T> {
        let raw = self.segments.iter().filter(|s| pred(&s.label)).map(|s| Interval::new(s.lo, s.hi)).collect();
        Region::from_intervals(raw)
    }

    /// Number of processed intervals `T`.
    pub fn breakpoint_count(&self) -> usize {
        self.segments.len()
    }

    /// Label of the segment holding `z`.
    pub fn label_at(&self, z: T) -> Option<&L> {
        let idx = self.segments.partition_point(|s| s.hi < z);
        self.segments.get(idx).filter(|s| s.lo <= z).map(|s| &s.label)
    }
}

/// Generic breakpoint walk. `local(seed)` returns the interval around
/// `seed` on which the selector output at `seed` is unchanged.
///
/// When the interval returned for `z + dz` does not reach back to `z` the
/// seed jumped over a narrow interval, and the offset is halved. The same
/// happens when `local` reports a numerically inconsistent seed.
pub(crate) fn walk<T: Real, L>(cfg: &HomotopyConfig<T>, mut local: impl FnMut(T) -> Result<(Interval<T>, L)>) -> Result<Walk<T, L>> {
    cfg.validate()?;
    let width = cfg.z_hi - cfg.z_lo;
    let gap_tol = T::floor_tol(1e-10) * width.max(cfg.z_lo.abs()).max(cfg.z_hi.abs());
    let mut segments: Vec<Segment<T, L>> = Vec::new();
    let mut z = cfg.z_lo;
    while z < cfg.z_hi {
        let mut dz = cfg.delta_z;
        let mut accepted = None;
        let mut last_err = None;
        for attempt in 0..=MAX_HALVINGS {
            let seed = z + dz;
            match local(seed) {
                Ok((iv, label)) => {
                    let holds_seed = iv.lo <= seed + gap_tol && iv.hi >= seed - gap_tol;
                    let advances = iv.hi >= z + dz / T::lit(10.0);
                    let closes_gap = iv.lo <= z + gap_tol || attempt == MAX_HALVINGS;
                    if holds_seed && advances && closes_gap {
                        accepted = Some((iv, label));
                        break;
                    }
                    last_err = None;
                }
                Err(e @ Error::InconsistentConstraints { .. }) => last_err = Some(e),
                Err(e) => return Err(e),
            }
            dz = dz * T::lit(0.5);
        }
        let Some((iv, label)) = accepted else {
            return Err(last_err.unwrap_or(Error::StalledPath { z: z.to_f64().unwrap_or(f64::NAN) }));
        };
        let lo = if segments.is_empty() { iv.lo.min(z) } else { z };
        segments.push(Segment { lo, hi: iv.hi, label });
        z = iv.hi;
    }
    Ok(Walk { segments })
}
