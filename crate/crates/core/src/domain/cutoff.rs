//! Smooth even cutoffs `χ_0 ≺ χ_1 ≺ χ_2` on the chart coordinate.

use crate::error::{Error, Result};
use crate::normlab::spectral::smooth_step;

/// Each `χ_i` equals 1 on `|t| <= start_i` and vanishes for `|t| >= end_i`.
/// `start_0 = 1/2`, and `start_{i+1} = end_i` so that `χ_{i+1} ≡ 1` on
/// `supp χ_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffProfile {
    plateau: f64,
    ends: [f64; 3],
}

impl Default for CutoffProfile {
    fn default() -> Self {
        CutoffProfile { plateau: 0.5, ends: [0.75, 0.95, 0.99] }
    }
}

impl CutoffProfile {
    pub fn new(plateau: f64, ends: [f64; 3]) -> Result<Self> {
        let ok = plateau > 0.0 && plateau < ends[0] && ends[0] < ends[1] && ends[1] < ends[2] && ends[2] < 1.0;
        if !ok {
            return Err(Error::InvalidParameter(format!("cutoff breakpoints must increase inside (0, 1): {plateau}, {ends:?}")));
        }
        Ok(CutoffProfile { plateau, ends })
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn ends(&self) -> [f64; 3] {
        self.ends
    }

    fn ramp(start: f64, end: f64, t: f64) -> f64 {
        1.0 - smooth_step((t.abs() - start) / (end - start))
    }

    pub fn chi(&self, i: usize, t: f64) -> f64 {
        let start = if i == 0 { self.plateau } else { self.ends[i - 1] };
        Self::ramp(start, self.ends[i], t)
    }

    pub fn chi0(&self, t: f64) -> f64 {
        self.chi(0, t)
    }

    pub fn chi1(&self, t: f64) -> f64 {
        self.chi(1, t)
    }

    pub fn chi2(&self, t: f64) -> f64 {
        self.chi(2, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support_relations() {
        let c = CutoffProfile::default();
        for i in 0..=10_000 {
            let t = -1.0 + 2.0 * i as f64 / 10_000.0;
            let v = [c.chi0(t), c.chi1(t), c.chi2(t)];
            assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
            if t.abs() <= 0.5 {
                assert_eq!(v[0], 1.0);
            }
            if v[0] > 0.0 {
                assert_eq!(v[1], 1.0);
            }
            if v[1] > 0.0 {
                assert_eq!(v[2], 1.0);
            }
            if t.abs() >= 0.99 {
                assert_eq!(v[2], 0.0);
            }
        }
    }

    #[test]
    fn derivatives_stay_finite() {
        let c = CutoffProfile::default();
        let h = 1e-3;
        let mut d: Vec<f64> = (0..2000).map(|i| c.chi0(-1.0 + i as f64 * h)).collect();
        for _ in 0..6 {
            d = d.windows(2).map(|w| (w[1] - w[0]) / h).collect();
            assert!(d.iter().all(|x| x.is_finite()));
        }
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(CutoffProfile::new(0.5, [0.4, 0.9, 0.95]).is_err());
        assert!(CutoffProfile::new(0.5, [0.6, 0.9, 1.0]).is_err());
        assert!(CutoffProfile::new(0.5, [0.6, 0.8, 0.9]).is_ok());
    }
}
