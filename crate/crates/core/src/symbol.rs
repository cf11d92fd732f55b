//! Multiplier symbols: the general ratio `M(ξ) = Ψ_φ(ξ)/Ψ(ξ)`, its
//! finite-time version `m_s`, and closed-form families (stable powers,
//! second-order Riesz transforms, Beurling–Ahlfors).
//!
//! Every symbol takes the value 0 where the exponent vanishes.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::levy_measure::{cos_minus_one, JumpModulator, LevyMeasure, DEFAULT_RADIAL_TOL};
use crate::quadrature::{integrate, QuadOptions};

/// Relative threshold under which `|Ψ(ξ)|` counts as zero.
pub const ZERO_THRESHOLD: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolKind {
    /// `M ≡ c`, including at `ξ = 0`.
    Constant(Complex64),
    General {
        measure: LevyMeasure,
        modulator: JumpModulator,
    },
    /// `m_s = (1 − e^{2|s|Ψ}) M` for `s < 0`.
    FiniteTime {
        measure: LevyMeasure,
        modulator: JumpModulator,
        s: f64,
    },
    /// `|ξ_j|^α / Σ_i |ξ_i|^α`.
    Power { alpha: f64, axis: usize, dim: usize },
    /// `−ξ_j² / |ξ|²`.
    Riesz2 { axis: usize, dim: usize },
    /// `−2 ξ_j ξ_k / |ξ|²`.
    RieszPair { axes: (usize, usize), dim: usize },
    /// `−Σ a_j ξ_j² / |ξ|²`.
    RieszCombo { coefficients: Vec<f64> },
    /// `(ξ_1 − iξ_2)/(ξ_1 + iξ_2)` in the plane.
    BeurlingAhlfors,
    /// `iξ_j/|ξ|`, kept for reference sweeps.
    FirstOrderRiesz { axis: usize, dim: usize },
}

/// An evaluatable symbol. Construction validates parameters and binds the
/// modulator to the measure's atoms.
#[derive(Debug, Clone)]
pub struct MultiplierSymbol {
    kind: SymbolKind,
    phi: Vec<Complex64>,
    tol: f64,
    zero_threshold: f64,
}

fn check_axis(axis: usize, dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if axis >= dim {
        return Err(invalid(format!(
            "axis {axis} out of range for dimension {dim}"
        )));
    }
    Ok(())
}

impl MultiplierSymbol {
    pub fn new(kind: SymbolKind) -> Result<Self> {
        let mut phi = Vec::new();
        match &kind {
            SymbolKind::Constant(c) => {
                if !(c.re.is_finite() && c.im.is_finite()) {
                    return Err(invalid("constant symbol must be finite"));
                }
            }
            SymbolKind::General { measure, modulator } => {
                phi = modulator.bind(measure)?;
            }
            SymbolKind::FiniteTime {
                measure,
                modulator,
                s,
            } => {
                if !(s.is_finite() && *s < 0.0) {
                    return Err(invalid(format!("finite-time symbol needs s < 0, got {s}")));
                }
                phi = modulator.bind(measure)?;
            }
            SymbolKind::Power { alpha, axis, dim } => {
                if !(*alpha > 0.0 && *alpha <= 2.0) {
                    return Err(invalid(format!(
                        "power symbol needs alpha in (0, 2], got {alpha}"
                    )));
                }
                check_axis(*axis, *dim)?;
            }
            SymbolKind::Riesz2 { axis, dim } | SymbolKind::FirstOrderRiesz { axis, dim } => {
                check_axis(*axis, *dim)?
            }
            SymbolKind::RieszPair { axes, dim } => {
                check_axis(axes.0, *dim)?;
                check_axis(axes.1, *dim)?;
                if axes.0 == axes.1 {
                    return Err(invalid("riesz pair needs two distinct axes"));
                }
            }
            SymbolKind::RieszCombo { coefficients } => {
                if coefficients.is_empty() || coefficients.iter().any(|a| !(a.abs() <= 1.0)) {
                    return Err(invalid(
                        "riesz combination needs coefficients with |a_j| <= 1",
                    ));
                }
            }
            SymbolKind::BeurlingAhlfors => {}
        }
        Ok(Self {
            kind,
            phi,
            tol: DEFAULT_RADIAL_TOL,
            zero_threshold: ZERO_THRESHOLD,
        })
    }

    /// Overrides the radial quadrature tolerance used by stable measures.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_zero_threshold(mut self, threshold: f64) -> Self {
        self.zero_threshold = threshold;
        self
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    /// Dimension of the frequency variable; `None` for the constant kind.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            SymbolKind::Constant(_) => None,
            SymbolKind::General { measure, .. } | SymbolKind::FiniteTime { measure, .. } => {
                Some(measure.dim())
            }
            SymbolKind::Power { dim, .. }
            | SymbolKind::Riesz2 { dim, .. }
            | SymbolKind::RieszPair { dim, .. }
            | SymbolKind::FirstOrderRiesz { dim, .. } => Some(*dim),
            SymbolKind::RieszCombo { coefficients } => Some(coefficients.len()),
            SymbolKind::BeurlingAhlfors => Some(2),
        }
    }

    /// True when `M(−ξ) = conj(M(ξ))`, so real inputs map to real outputs.
    pub fn is_hermitian(&self) -> bool {
        match &self.kind {
            SymbolKind::Constant(c) => c.im == 0.0,
            SymbolKind::General { .. } | SymbolKind::FiniteTime { .. } => {
                self.phi.iter().all(|v| v.im == 0.0)
            }
            SymbolKind::FirstOrderRiesz { .. } => true,
            SymbolKind::BeurlingAhlfors => false,
            _ => true,
        }
    }

    /// Non-fatal remarks about the input, e.g. degenerate support.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let SymbolKind::General { measure, .. } | SymbolKind::FiniteTime { measure, .. } =
            &self.kind
        {
            if measure.is_degenerate() {
                out.push(
                    "Lévy measure is concentrated on a proper subspace; Ψ vanishes on a whole hyperplane of frequencies"
                        .to_string(),
                );
            }
        }
        out
    }

    /// `(Ψ_φ(ξ), Ψ(ξ))` for measure-backed kinds.
    pub fn exponents(&self, xi: &[f64]) -> Result<(Complex64, f64)> {
        match &self.kind {
            SymbolKind::General { measure, .. } | SymbolKind::FiniteTime { measure, .. } => {
                self.check_dim(xi)?;
                exponent_pair(measure, &self.phi, xi, self.tol)
            }
            _ => Err(invalid("symbol kind has no associated Lévy measure")),
        }
    }

    fn check_dim(&self, xi: &[f64]) -> Result<()> {
        if let Some(d) = self.dim() {
            if xi.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: xi.len(),
                });
            }
        }
        if !xi.iter().all(|x| x.is_finite()) {
            return Err(invalid("frequency has a non-finite component"));
        }
        Ok(())
    }

    fn is_zero_exponent(&self, measure: &LevyMeasure, psi: f64) -> bool {
        psi.abs() < self.zero_threshold * measure.scale()
    }

    pub fn eval(&self, xi: &[f64]) -> Result<Complex64> {
        self.check_dim(xi)?;
        let zero = Complex64::new(0.0, 0.0);
        let real = |x: f64| Complex64::new(x, 0.0);
        Ok(match &self.kind {
            SymbolKind::Constant(c) => *c,
            SymbolKind::General { measure, .. } => {
                let (num, den) = exponent_pair(measure, &self.phi, xi, self.tol)?;
                if self.is_zero_exponent(measure, den) {
                    zero
                } else {
                    num / den
                }
            }
            SymbolKind::FiniteTime { measure, s, .. } => {
                let (num, den) = exponent_pair(measure, &self.phi, xi, self.tol)?;
                if self.is_zero_exponent(measure, den) {
                    zero
                } else {
                    let damping = -(2.0 * s.abs() * den).exp_m1();
                    num / den * damping
                }
            }
            SymbolKind::Power { alpha, axis, .. } => real(eval_power(*alpha, *axis, xi)),
            _ => eval_riesz_family(&self.kind, xi)?,
        })
    }

    /// Finite-time symbol of the same measure and modulator.
    pub fn finite_time(&self, s: f64) -> Result<MultiplierSymbol> {
        match &self.kind {
            SymbolKind::General { measure, modulator }
            | SymbolKind::FiniteTime {
                measure, modulator, ..
            } => Ok(MultiplierSymbol::new(SymbolKind::FiniteTime {
                measure: measure.clone(),
                modulator: modulator.clone(),
                s,
            })?
            .with_tolerance(self.tol)
            .with_zero_threshold(self.zero_threshold)),
            _ => Err(invalid("finite-time symbols need a measure-backed kind")),
        }
    }

    /// `lim_{r→0+} M(ξ + rη)` by Richardson extrapolation over `r = r0·2^{−k}`.
    ///
    /// Diagnostic only; the value at a zero of `Ψ` stays 0 by convention.
    pub fn directional_limit(
        &self,
        xi: &[f64],
        eta: &[f64],
        r0: f64,
        levels: usize,
    ) -> Result<Complex64> {
        self.check_dim(xi)?;
        if eta.len() != xi.len() || eta.iter().all(|&e| e == 0.0) {
            return Err(invalid(
                "direction must be a nonzero vector of matching dimension",
            ));
        }
        let levels = levels.max(2);
        let mut table: Vec<Complex64> = Vec::with_capacity(levels);
        for k in 0..levels {
            let r = r0 / 2f64.powi(k as i32);
            let p: Vec<f64> = xi.iter().zip(eta).map(|(x, e)| x + r * e).collect();
            table.push(self.eval(&p)?);
        }
        // Neville-style elimination of r, r², ... error terms.
        for order in 1..levels {
            let factor = 2f64.powi(order as i32);
            for k in (order..levels).rev() {
                table[k] = (factor * table[k] - table[k - 1]) / (factor - 1.0);
            }
        }
        Ok(table[levels - 1])
    }
}

fn exponent_pair(
    measure: &LevyMeasure,
    phi: &[Complex64],
    xi: &[f64],
    tol: f64,
) -> Result<(Complex64, f64)> {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    match measure {
        LevyMeasure::Discrete(m) => {
            for (a, p) in m.atoms().iter().zip(phi) {
                let c = a.weight * cos_minus_one(dot(xi, &a.location));
                num += p * c;
                den += c;
            }
        }
        LevyMeasure::Stable(m) => {
            let radial = m.radial(tol / m.angular_atoms().len() as f64);
            for (a, p) in m.angular_atoms().iter().zip(phi) {
                let c = a.weight * radial.eval(dot(xi, &a.location))?;
                num += p * c;
                den += c;
            }
        }
    }
    Ok((num, den))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|ξ_j|^α / (|ξ_1|^α + ⋯ + |ξ_d|^α)`, zero at the origin.
pub fn eval_power(alpha: f64, axis: usize, xi: &[f64]) -> f64 {
    let den: f64 = xi.iter().map(|x| x.abs().powf(alpha)).sum();
    if den == 0.0 {
        return 0.0;
    }
    xi[axis].abs().powf(alpha) / den
}

/// Closed-form Riesz-type symbols; all vanish at `ξ = 0`.
pub fn eval_riesz_family(kind: &SymbolKind, xi: &[f64]) -> Result<Complex64> {
    let norm2: f64 = xi.iter().map(|x| x * x).sum();
    let zero = Complex64::new(0.0, 0.0);
    if matches!(kind, SymbolKind::BeurlingAhlfors) && xi.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: xi.len(),
        });
    }
    if norm2 == 0.0 {
        return Ok(zero);
    }
    Ok(match kind {
        SymbolKind::Riesz2 { axis, .. } => Complex64::new(-xi[*axis] * xi[*axis] / norm2, 0.0),
        SymbolKind::RieszPair { axes, .. } => {
            Complex64::new(-2.0 * xi[axes.0] * xi[axes.1] / norm2, 0.0)
        }
        SymbolKind::RieszCombo { coefficients } => {
            if coefficients.len() != xi.len() {
                return Err(Error::DimensionMismatch {
                    expected: coefficients.len(),
                    found: xi.len(),
                });
            }
            let s: f64 = coefficients.iter().zip(xi).map(|(a, x)| a * x * x).sum();
            Complex64::new(-s / norm2, 0.0)
        }
        SymbolKind::BeurlingAhlfors => {
            let z = Complex64::new(xi[0], xi[1]);
            z.conj() / z
        }
        SymbolKind::FirstOrderRiesz { axis, .. } => Complex64::new(0.0, xi[*axis] / norm2.sqrt()),
        _ => return Err(invalid("not a Riesz-family symbol")),
    })
}

/// Gradient of the power symbol `|ξ_j|^α / Σ_i |ξ_i|^α`.
///
/// Requires every coordinate of `ξ` to be nonzero.
pub fn power_symbol_gradient(alpha: f64, axis: usize, xi: &[f64]) -> Result<Vec<f64>> {
    check_axis(axis, xi.len())?;
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(invalid(format!("alpha = {alpha} outside (0, 2]")));
    }
    if xi.iter().any(|&x| x == 0.0 || !x.is_finite()) {
        return Err(Error::SingularPoint(format!(
            "power symbol gradient undefined on coordinate hyperplanes: {xi:?}"
        )));
    }
    let a: Vec<f64> = xi.iter().map(|x| x.abs().powf(alpha)).collect();
    let da: Vec<f64> = xi
        .iter()
        .map(|x| alpha * x.abs().powf(alpha - 1.0) * x.signum())
        .collect();
    let s: f64 = a.iter().sum();
    Ok((0..xi.len())
        .map(|i| {
            let own = if i == axis { da[i] * s } else { 0.0 };
            (own - a[axis] * da[i]) / (s * s)
        })
        .collect())
}

/// `∫_{cutoff}^{1} |∂_1 M(ξ_1, 1)|² dξ_1` for the planar power symbol with
/// `j = 1`: finite as `cutoff → 0` iff `α > 1/2`.
pub fn gradient_energy_on_segment(alpha: f64, cutoff: f64, tol: f64) -> Result<f64> {
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(invalid("cutoff must lie in (0, 1)"));
    }
    // Geometric breakpoints resolve the algebraic blow-up at 0.
    let mut breaks = vec![cutoff];
    let mut b = cutoff * 4.0;
    while b < 1.0 {
        breaks.push(b);
        b *= 4.0;
    }
    breaks.push(1.0);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let q = integrate(
            |x: f64| {
                let g = power_symbol_gradient(alpha, 0, &[x, 1.0])
                    .map(|g| g[0])
                    .unwrap_or(0.0);
                g * g
            },
            w[0],
            w[1],
            QuadOptions::absolute(tol / breaks.len() as f64).with_rel(1e-12),
        )?;
        total += q.value;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_measure::{DiscreteLevyMeasure, TruncatedStableMeasure};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn axis_stable(eps: f64) -> LevyMeasure {
        LevyMeasure::Stable(TruncatedStableMeasure::axis(2, 1.0, eps, None).unwrap())
    }

    fn general(measure: LevyMeasure, modulator: JumpModulator) -> MultiplierSymbol {
        MultiplierSymbol::new(SymbolKind::General { measure, modulator }).unwrap()
    }

    #[test]
    fn axis_indicator_on_cauchy_measure() {
        let m = general(axis_stable(1e-6), JumpModulator::AxisIndicator(0));
        assert_abs_diff_eq!(m.eval(&[1.0, 1.0]).unwrap().re, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(m.eval(&[2.0, 0.0]).unwrap().re, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn zero_exponent_convention() {
        let nu =
            LevyMeasure::Discrete(DiscreteLevyMeasure::nearest_neighbour(1, 1.0, 1.0).unwrap());
        let m = general(nu, JumpModulator::Constant(Complex64::new(1.0, 0.0)));
        assert_eq!(m.eval(&[2.0 * PI]).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(m.eval(&[0.0]).unwrap(), Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(m.eval(&[0.3]).unwrap().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn antisymmetric_modulator_rejected() {
        let nu =
            LevyMeasure::Discrete(DiscreteLevyMeasure::nearest_neighbour(1, 1.0, 1.0).unwrap());
        let r = MultiplierSymbol::new(SymbolKind::General {
            measure: nu,
            modulator: JumpModulator::SignPattern(vec![1.0, -1.0]),
        });
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn finite_time_values() {
        let nu =
            LevyMeasure::Discrete(DiscreteLevyMeasure::nearest_neighbour(1, 1.0, 1.0).unwrap());
        let m = general(nu, JumpModulator::Constant(Complex64::new(1.0, 0.0)));
        let ms = m.finite_time(-1.0).unwrap();
        // Ψ(π) = −4 ⇒ m_s = 1 − e^{−8}.
        assert_abs_diff_eq!(
            ms.eval(&[PI]).unwrap().re,
            1.0 - (-8.0f64).exp(),
            epsilon = 1e-15
        );
        assert_eq!(ms.eval(&[2.0 * PI]).unwrap(), Complex64::new(0.0, 0.0));
        let tiny = m.finite_time(-1e-12).unwrap();
        assert!(tiny.eval(&[1.0]).unwrap().norm() < 1e-11);
        assert!(m.finite_time(0.0).is_err());
    }

    #[test]
    fn power_examples() {
        assert_abs_diff_eq!(eval_power(1.0, 0, &[1.0, 1.0]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_power(2.0, 0, &[3.0, 4.0]), 9.0 / 25.0, epsilon = 1e-15);
        assert_eq!(eval_power(1.0, 0, &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn riesz_examples() {
        let r2 = MultiplierSymbol::new(SymbolKind::Riesz2 { axis: 0, dim: 2 }).unwrap();
        assert_abs_diff_eq!(
            r2.eval(&[3.0, 4.0]).unwrap().re,
            -9.0 / 25.0,
            epsilon = 1e-15
        );
        let combo = MultiplierSymbol::new(SymbolKind::RieszCombo {
            coefficients: vec![1.0, 1.0],
        })
        .unwrap();
        assert_abs_diff_eq!(combo.eval(&[0.3, -2.0]).unwrap().re, -1.0, epsilon = 1e-15);
        let ba = MultiplierSymbol::new(SymbolKind::BeurlingAhlfors).unwrap();
        assert_eq!(ba.eval(&[1.0, 0.0]).unwrap(), Complex64::new(1.0, 0.0));
        assert!(ba.eval(&[1.0, 0.0, 0.0]).is_err());
        assert!(MultiplierSymbol::new(SymbolKind::RieszCombo {
            coefficients: vec![1.5, 0.0]
        })
        .is_err());
    }

    #[test]
    fn beurling_ahlfors_decomposition() {
        let ba = MultiplierSymbol::new(SymbolKind::BeurlingAhlfors).unwrap();
        let r1 = MultiplierSymbol::new(SymbolKind::Riesz2 { axis: 0, dim: 2 }).unwrap();
        let r2 = MultiplierSymbol::new(SymbolKind::Riesz2 { axis: 1, dim: 2 }).unwrap();
        let f1 = MultiplierSymbol::new(SymbolKind::FirstOrderRiesz { axis: 0, dim: 2 }).unwrap();
        let f2 = MultiplierSymbol::new(SymbolKind::FirstOrderRiesz { axis: 1, dim: 2 }).unwrap();
        for i in -7..=7 {
            for j in -7..=7 {
                if i == 0 && j == 0 {
                    continue;
                }
                let xi = [i as f64 * 0.37, j as f64 * 1.13];
                let lhs = ba.eval(&xi).unwrap();
                let rhs = -r1.eval(&xi).unwrap()
                    + r2.eval(&xi).unwrap()
                    + Complex64::new(0.0, 2.0) * f2.eval(&xi).unwrap() * f1.eval(&xi).unwrap();
                assert!((lhs - rhs).norm() < 1e-12, "{xi:?}");
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        // Central differences, O(h²) oracle.
        let h = 1e-5;
        for (alpha, xi) in [(1.0, [1.0, 1.0]), (0.4, [0.3, -1.2]), (1.7, [-2.0, 0.5])] {
            let g = power_symbol_gradient(alpha, 0, &xi).unwrap();
            for i in 0..2 {
                let mut p = xi;
                let mut m = xi;
                p[i] += h;
                m[i] -= h;
                let fd = (eval_power(alpha, 0, &p) - eval_power(alpha, 0, &m)) / (2.0 * h);
                assert_abs_diff_eq!(g[i], fd, epsilon = 1e-8);
            }
        }
        let g = power_symbol_gradient(1.0, 0, &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(g[0], 0.25, epsilon = 1e-15);
        let gm = power_symbol_gradient(1.0, 0, &[-1.0, 1.0]).unwrap();
        assert_eq!(g[0], -gm[0]);
        assert!(matches!(
            power_symbol_gradient(1.0, 0, &[0.0, 1.0]),
            Err(Error::SingularPoint(_))
        ));
    }

    #[test]
    fn hormander_failure_below_one_half() {
        let cutoffs = [1e-8, 1e-10, 1e-12, 1e-14];
        let low: Vec<f64> = cutoffs
            .iter()
            .map(|&c| gradient_energy_on_segment(0.4, c, 1e-10).unwrap())
            .collect();
        let high: Vec<f64> = cutoffs
            .iter()
            .map(|&c| gradient_energy_on_segment(0.6, c, 1e-10).unwrap())
            .collect();
        // α = 0.4: near 0 the integrand is ≈ α² ξ^{−1.2}, so each factor 100
        // in the cutoff multiplies the divergent part by 100^{0.2}.
        let growth: Vec<f64> = low.windows(2).map(|w| w[1] - w[0]).collect();
        for w in growth.windows(2) {
            assert_abs_diff_eq!(w[1] / w[0], 100f64.powf(0.2), epsilon = 2e-2);
        }
        // α = 0.6: increments shrink like 100^{−0.2}; the sequence converges.
        let inc: Vec<f64> = high.windows(2).map(|w| w[1] - w[0]).collect();
        for w in inc.windows(2) {
            assert_abs_diff_eq!(w[1] / w[0], 100f64.powf(-0.2), epsilon = 2e-2);
        }
        assert!(low[3] > 10.0 * high[3]);
    }

    #[test]
    fn directional_limits_differ_at_origin() {
        let m = MultiplierSymbol::new(SymbolKind::Power {
            alpha: 1.0,
            axis: 0,
            dim: 2,
        })
        .unwrap();
        let a = m
            .directional_limit(&[0.0, 0.0], &[1.0, 0.0], 0.1, 6)
            .unwrap();
        let b = m
            .directional_limit(&[0.0, 0.0], &[1.0, 1.0], 0.1, 6)
            .unwrap();
        assert_abs_diff_eq!(a.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.re, 0.5, epsilon = 1e-12);
        assert_eq!(m.eval(&[0.0, 0.0]).unwrap().re, 0.0);
    }

    #[test]
    fn directional_limit_at_periodic_zero() {
        // Ψ vanishes at (2π, 0) for the four-neighbour walk; the limit along
        // η is η_1² / |η|² for φ = axis indicator.
        let nu =
            LevyMeasure::Discrete(DiscreteLevyMeasure::nearest_neighbour(2, 1.0, 1.0).unwrap());
        let m = general(nu, JumpModulator::AxisIndicator(0));
        assert_eq!(m.eval(&[2.0 * PI, 0.0]).unwrap().re, 0.0);
        let l = m
            .directional_limit(&[2.0 * PI, 0.0], &[1.0, 2.0], 1e-2, 5)
            .unwrap();
        assert_abs_diff_eq!(l.re, 0.2, epsilon = 1e-6);
    }

    #[test]
    fn degenerate_measure_diagnostic() {
        let nu = LevyMeasure::Discrete(
            DiscreteLevyMeasure::new(
                2,
                vec![
                    crate::levy_measure::Atom::new(vec![1.0, 0.0], 1.0),
                    crate::levy_measure::Atom::new(vec![-1.0, 0.0], 1.0),
                ],
            )
            .unwrap(),
        );
        let m = general(nu, JumpModulator::Constant(Complex64::new(0.5, 0.0)));
        assert_eq!(m.diagnostics().len(), 1);
        assert_abs_diff_eq!(m.eval(&[1.0, 3.0]).unwrap().re, 0.5, epsilon = 1e-15);
    }
}
