//! Finite families solving `Σ_j a_j(−b_j)^k = 1` for `−m1 <= k <= m2`.

use crate::coeffs::family::{CoefficientFamily, Entry, FamilyKind, ValidatedRange};
use crate::coeffs::fixed_point::DEFAULT_DELTA;
use crate::error::{Error, Result};
use crate::precision::Real;

/// Gaussian elimination with partial pivoting.
pub fn solve_linear(mut m: Vec<Vec<Real>>, mut rhs: Vec<Real>) -> Result<Vec<Real>> {
    let n = rhs.len();
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("linear system must be square".into()));
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(col);
        if m[pivot][col].is_zero() {
            return Err(Error::IllConditioned { residual: f64::INFINITY, tol: 0.0 });
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let factor = &m[row][col] / &m[col][col];
            if factor.is_zero() {
                continue;
            }
            let (top, rest) = m.split_at_mut(row);
            for (x, p) in rest[0][col..].iter_mut().zip(&top[col][col..]) {
                *x = &*x - &(&factor * p);
            }
            let t = &factor * &rhs[col];
            rhs[row] = &rhs[row] - &t;
        }
    }
    let mut x = rhs.clone();
    for row in (0..n).rev() {
        let mut acc = rhs[row].clone();
        for c in row + 1..n {
            acc = &acc - &(&m[row][c] * &x[c]);
        }
        x[row] = &acc / &m[row][row];
    }
    Ok(x)
}

/// `a_j = (−b_j)^{m1} ∏_{k≠j} (b_k + 1)/(b_k − b_j)`.
pub fn vandermonde_closed_form(nodes: &[Real], m1: usize) -> Vec<Real> {
    nodes
        .iter()
        .enumerate()
        .map(|(j, bj)| {
            let bits = bj.bits();
            let one = Real::one(bits);
            let prod = nodes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .fold(one.clone(), |acc, (_, bk)| &acc * &(&(bk + &one) / &(bk - bj)));
            &(-bj).powi(m1 as i32) * &prod
        })
        .collect()
}

/// Direct solve of the moment system.
pub fn vandermonde_solve(nodes: &[Real], m1: usize, m2: usize) -> Result<Vec<Real>> {
    let ks: Vec<i32> = (-(m1 as i32)..=m2 as i32).collect();
    let m = ks.iter().map(|&k| nodes.iter().map(|b| (-b).powi(k)).collect()).collect();
    let bits = nodes.iter().map(Real::bits).max().unwrap_or(64);
    solve_linear(m, vec![Real::one(bits); ks.len()])
}

fn check_nodes(nodes: &[Real], m1: usize, m2: usize) -> Result<()> {
    if nodes.len() != m1 + m2 + 1 {
        return Err(Error::InvalidParameter(format!(
            "{} nodes given, moment range -{m1}..={m2} needs {}",
            nodes.len(),
            m1 + m2 + 1
        )));
    }
    for (i, b) in nodes.iter().enumerate() {
        if !(b > &Real::zero(64)) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("node {} is not a positive finite number", b.to_f64())));
        }
        if nodes[..i].iter().any(|c| c == b) {
            return Err(Error::DuplicateNode(b.to_f64()));
        }
    }
    Ok(())
}

// Both paths must agree and the closed form must satisfy the system, relative
// to the size of the terms being cancelled.
fn cross_check(nodes: &[Real], a: &[Real], m1: usize, m2: usize) -> Result<()> {
    let bits = nodes.iter().map(Real::bits).max().unwrap_or(64);
    let tol = (-(bits as f64) / 2.0).exp2();
    let solved = vandermonde_solve(nodes, m1, m2)?;
    for (x, y) in a.iter().zip(&solved) {
        let scale = x.abs().to_f64().max(1.0);
        let diff = (x - y).abs().to_f64();
        if diff > tol * scale {
            return Err(Error::IllConditioned { residual: diff / scale, tol });
        }
    }
    for k in -(m1 as i32)..=m2 as i32 {
        let (sum, mag) = a.iter().zip(nodes).fold((Real::zero(bits), 0.0), |(s, m), (aj, bj)| {
            let t = aj * &(-bj).powi(k);
            let mag = m + t.abs().to_f64();
            (s + t, mag)
        });
        let residual = (&sum - &Real::one(bits)).abs().to_f64();
        if residual > tol * mag.max(1.0) {
            return Err(Error::IllConditioned { residual, tol: tol * mag.max(1.0) });
        }
    }
    Ok(())
}

/// Family with entries indexed `−m1..=m2` matching `nodes` in order.
pub fn vandermonde_coefficients(nodes: &[Real], m1: usize, m2: usize) -> Result<CoefficientFamily> {
    check_nodes(nodes, m1, m2)?;
    let a = vandermonde_closed_form(nodes, m1);
    cross_check(nodes, &a, m1, m2)?;
    let entries = a
        .into_iter()
        .zip(nodes)
        .enumerate()
        .map(|(i, (a, b))| Entry { j: i as i64 - m1 as i64, a, b: b.clone() })
        .collect();
    CoefficientFamily::new(
        FamilyKind::FiniteVandermonde,
        None,
        DEFAULT_DELTA,
        entries,
        vec![],
        ValidatedRange::Span { m1: m1 as u32, m2: m2 as u32 },
    )
}

/// The family `A^{m,r}`: nodes `r·2^{−j}`, `j = 0..=2m`, moments `|k| <= m`.
pub fn dyadic_finite_coefficients(m: usize, r: &Real) -> Result<CoefficientFamily> {
    if !(r > &Real::zero(64)) {
        return Err(Error::InvalidParameter("r must be positive".into()));
    }
    let bits = r.bits();
    let nodes: Vec<Real> = (0..=2 * m).map(|j| r * &Real::int_pow(2, -(j as i32), bits)).collect();
    let a = vandermonde_closed_form(&nodes, m);
    cross_check(&nodes, &a, m, m)?;
    let entries = a.into_iter().zip(nodes).enumerate().map(|(j, (a, b))| Entry { j: j as i64, a, b }).collect();
    CoefficientFamily::new(
        FamilyKind::FiniteDyadic,
        Some(Real::ratio(1, 2, bits)),
        DEFAULT_DELTA,
        entries,
        vec![],
        ValidatedRange::Span { m1: m as u32, m2: m as u32 },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const BITS: usize = 192;

    fn reals(xs: &[f64]) -> Vec<Real> {
        xs.iter().map(|&x| Real::from_f64(x, BITS)).collect()
    }

    fn a_f64(f: &CoefficientFamily) -> Vec<f64> {
        f.entries().iter().map(|e| e.a.to_f64()).collect()
    }

    #[test]
    fn hestenes_pair() {
        let fam = vandermonde_coefficients(&reals(&[1.0, 2.0]), 0, 1).unwrap();
        assert_eq!(fam.entries()[0].a, Real::from_i64(3, BITS));
        assert_eq!(fam.entries()[1].a, Real::from_i64(-2, BITS));
        // hand-solved 2x2 system as the oracle
        let solved = vandermonde_solve(&reals(&[1.0, 2.0]), 0, 1).unwrap();
        assert_eq!(solved.iter().map(Real::to_f64).collect::<Vec<_>>(), vec![3.0, -2.0]);
    }

    #[test]
    fn singleton() {
        let fam = vandermonde_coefficients(&reals(&[7.5]), 0, 0).unwrap();
        assert_eq!(a_f64(&fam), vec![1.0]);
        assert_eq!(a_f64(&dyadic_finite_coefficients(0, &Real::from_f64(3.0, BITS)).unwrap()), vec![1.0]);
    }

    #[test]
    fn duplicate_nodes_rejected() {
        assert!(matches!(
            vandermonde_coefficients(&reals(&[1.0, 2.0, 1.0]), 1, 1),
            Err(Error::DuplicateNode(_))
        ));
        assert!(vandermonde_coefficients(&reals(&[1.0, 2.0]), 1, 1).is_err());
    }

    #[test]
    fn dyadic_m1() {
        let fam = dyadic_finite_coefficients(1, &Real::one(BITS)).unwrap();
        let expect = [-5.0, 10.0, -4.0];
        for (e, x) in fam.entries().iter().zip(expect) {
            assert!((e.a.to_f64() - x).abs() < 1e-20);
        }
        // independent solve
        let solved = vandermonde_solve(&reals(&[1.0, 0.5, 0.25]), 1, 1).unwrap();
        for (s, x) in solved.iter().zip(expect) {
            assert!((s.to_f64() - x).abs() < 1e-20);
        }
    }

    #[test]
    fn dyadic_bound_shape() {
        for m in 1..=4usize {
            let max_a = |r: f64| {
                dyadic_finite_coefficients(m, &Real::from_f64(r, BITS)).unwrap().max_abs_a().to_f64()
            };
            let shape = |r: f64| r.powi(m as i32) + r.powi(-(m as i32));
            let c = [0.125, 1.0, 8.0].iter().map(|&r| max_a(r) / shape(r)).fold(0.0, f64::max);
            for e in -3..=3 {
                let r = 4f64.powi(e);
                assert!(max_a(r) <= 2.0 * c * shape(r), "m={m} r={r}");
            }
        }
    }
}
