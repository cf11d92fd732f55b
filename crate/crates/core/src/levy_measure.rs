//! Symmetric Lévy measures, jump modulators, the characteristic exponent
//! `Ψ(ξ) = ∫ (cos ξ·z − 1) ν(dz)` and the transition measures `p_t` of the
//! associated compound Poisson process.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::{Complex64, ComplexFloat};
use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadOptions};

/// Default absolute tolerance of the radial quadrature for stable measures.
pub const DEFAULT_RADIAL_TOL: f64 = 1e-10;
/// Default Poisson-tail tolerance for truncated transition series.
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;
/// Largest admissible `t·|ν|` for [`transition_measure`].
pub const MAX_POISSON_MEAN: f64 = 50.0;

const LOCATION_TOL: f64 = 1e-12;

/// A weighted point mass `weight · δ_location`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: Vec<f64>,
    pub weight: f64,
}

impl Atom {
    pub fn new(location: Vec<f64>, weight: f64) -> Self {
        Self { location, weight }
    }

    fn norm(&self) -> f64 {
        self.location.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn same_location(a: &[f64], b: &[f64], scale: f64) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= LOCATION_TOL * scale.max(1.0))
}

/// For each atom the index of its mirror image `−z` with equal weight.
fn mirror_pairs(atoms: &[Atom]) -> Result<Vec<usize>> {
    let mut pairs = Vec::with_capacity(atoms.len());
    for (i, a) in atoms.iter().enumerate() {
        let neg: Vec<f64> = a.location.iter().map(|x| -x).collect();
        let scale = a.norm();
        let j = atoms
            .iter()
            .position(|b| same_location(&b.location, &neg, scale))
            .ok_or_else(|| invalid(format!("atom {i} at {:?} has no mirror atom", a.location)))?;
        let wa = a.weight;
        let wb = atoms[j].weight;
        if (wa - wb).abs() > 1e-12 * wa.abs().max(wb.abs()) {
            return Err(invalid(format!(
                "atom {i} and its mirror carry different weights ({wa} vs {wb})"
            )));
        }
        pairs.push(j);
    }
    Ok(pairs)
}

fn check_atoms(atoms: &[Atom], dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if atoms.is_empty() {
        return Err(invalid("measure has no atoms"));
    }
    for (i, a) in atoms.iter().enumerate() {
        if a.location.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: a.location.len(),
            });
        }
        if !a.location.iter().all(|x| x.is_finite()) {
            return Err(invalid(format!("atom {i} has a non-finite coordinate")));
        }
        if !(a.weight.is_finite() && a.weight > 0.0) {
            return Err(invalid(format!(
                "atom {i} weight must be positive and finite"
            )));
        }
    }
    Ok(())
}

/// Finite symmetric measure `ν = Σ w_i δ_{z_i}` with no atom at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLevyMeasure {
    dim: usize,
    atoms: Vec<Atom>,
    pairs: Vec<usize>,
}

impl DiscreteLevyMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        check_atoms(&atoms, dim)?;
        if let Some(i) = atoms
            .iter()
            .position(|a| a.location.iter().all(|&x| x == 0.0))
        {
            return Err(invalid(format!("atom {i} sits at the origin")));
        }
        let pairs = mirror_pairs(&atoms)?;
        Ok(Self { dim, atoms, pairs })
    }

    /// `ν = Σ_j w_j (δ_{e_j} + δ_{−e_j})` scaled by `step`: nearest-neighbour jumps.
    pub fn nearest_neighbour(dim: usize, step: f64, weight: f64) -> Result<Self> {
        let mut atoms = Vec::with_capacity(2 * dim);
        for j in 0..dim {
            for sign in [1.0, -1.0] {
                let mut z = vec![0.0; dim];
                z[j] = sign * step;
                atoms.push(Atom::new(z, weight));
            }
        }
        Self::new(dim, atoms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Index of the mirror atom `−z_i`.
    pub fn mirror(&self, i: usize) -> usize {
        self.pairs[i]
    }

    /// Total mass `|ν|`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Integer coordinates of every atom on the lattice `step·Z^d`.
    pub fn lattice_offsets(&self, step: f64) -> Result<Vec<Vec<i64>>> {
        if !(step.is_finite() && step > 0.0) {
            return Err(invalid("lattice step must be positive"));
        }
        self.atoms
            .iter()
            .map(|a| {
                a.location
                    .iter()
                    .map(|&x| {
                        let m = (x / step).round();
                        if (x / step - m).abs() > 1e-9 {
                            Err(Error::UnsupportedMeasure(format!(
                                "atom coordinate {x} is not a multiple of the lattice step {step}"
                            )))
                        } else {
                            Ok(m as i64)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// True if every atom lies on one line through the origin (d = 2) so
    /// the measure is degenerate.
    pub fn is_degenerate(&self) -> bool {
        proper_subspace(self.dim, self.atoms.iter().map(|a| a.location.as_slice()))
    }
}

fn proper_subspace<'a>(dim: usize, points: impl Iterator<Item = &'a [f64]>) -> bool {
    if dim < 2 {
        return false;
    }
    let pts: Vec<&[f64]> = points.collect();
    // Rank of the Gram matrix via Gram–Schmidt.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in pts {
        let mut v = p.to_vec();
        for b in &basis {
            let c = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        let n = dot(&v, &v).sqrt();
        let scale = dot(p, p).sqrt();
        if n > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            basis.push(v.iter().map(|x| x / n).collect());
        }
    }
    basis.len() < dim
}

/// Symmetric `α`-stable measure `V(dr dθ) = r^{−1−α} dr μ(dθ)` restricted to
/// `epsilon < r < outer_radius`, with `μ` a finite symmetric sum of point
/// masses on the unit sphere.
///
/// `epsilon = 0` together with `outer_radius = None` is the untruncated
/// stable measure, which is only usable through its exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedStableMeasure {
    dim: usize,
    alpha: f64,
    epsilon: f64,
    outer_radius: Option<f64>,
    angular_atoms: Vec<Atom>,
    pairs: Vec<usize>,
}

impl TruncatedStableMeasure {
    pub fn new(
        dim: usize,
        alpha: f64,
        epsilon: f64,
        outer_radius: Option<f64>,
        angular_atoms: Vec<Atom>,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(invalid(format!("alpha = {alpha} is outside (0, 2)")));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(invalid("epsilon must be a finite nonnegative radius"));
        }
        if let Some(r) = outer_radius {
            if !(r.is_finite() && r > epsilon) {
                return Err(invalid("outer radius must be finite and exceed epsilon"));
            }
        }
        check_atoms(&angular_atoms, dim)?;
        for (i, a) in angular_atoms.iter().enumerate() {
            if (a.norm() - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("angular atom {i} is not a unit vector")));
            }
        }
        let pairs = mirror_pairs(&angular_atoms)?;
        Ok(Self {
            dim,
            alpha,
            epsilon,
            outer_radius,
            angular_atoms,
            pairs,
        })
    }

    /// Angular measure `Σ_j (δ_{e_j} + δ_{−e_j})`: independent coordinates.
    pub fn axis(dim: usize, alpha: f64, epsilon: f64, outer_radius: Option<f64>) -> Result<Self> {
        let mut atoms = Vec::with_capacity(2 * dim);
        for j in 0..dim {
            for sign in [1.0, -1.0] {
                let mut z = vec![0.0; dim];
                z[j] = sign;
                atoms.push(Atom::new(z, 1.0));
            }
        }
        Self::new(dim, alpha, epsilon, outer_radius, atoms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn outer_radius(&self) -> Option<f64> {
        self.outer_radius
    }
    pub fn angular_atoms(&self) -> &[Atom] {
        &self.angular_atoms
    }
    pub fn mirror(&self, i: usize) -> usize {
        self.pairs[i]
    }

    /// Total angular mass `μ(S^{d−1})`.
    pub fn angular_mass(&self) -> f64 {
        self.angular_atoms.iter().map(|a| a.weight).sum()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(
            self.dim,
            self.alpha,
            epsilon,
            self.outer_radius,
            self.angular_atoms.clone(),
        )
    }

    pub fn is_degenerate(&self) -> bool {
        proper_subspace(
            self.dim,
            self.angular_atoms.iter().map(|a| a.location.as_slice()),
        )
    }

    pub fn radial(&self, tol: f64) -> RadialIntegral {
        RadialIntegral {
            alpha: self.alpha,
            epsilon: self.epsilon,
            outer_radius: self.outer_radius,
            tol,
        }
    }
}

/// A symmetric Lévy measure of either supported form.
#[derive(Debug, Clone, PartialEq)]
pub enum LevyMeasure {
    Discrete(DiscreteLevyMeasure),
    Stable(TruncatedStableMeasure),
}

impl LevyMeasure {
    pub fn dim(&self) -> usize {
        match self {
            LevyMeasure::Discrete(m) => m.dim(),
            LevyMeasure::Stable(m) => m.dim(),
        }
    }

    /// Atoms carrying the modulator: point masses for discrete measures,
    /// angular atoms for stable ones.
    pub fn modulated_atoms(&self) -> &[Atom] {
        match self {
            LevyMeasure::Discrete(m) => m.atoms(),
            LevyMeasure::Stable(m) => m.angular_atoms(),
        }
    }

    pub fn mirror(&self, i: usize) -> usize {
        match self {
            LevyMeasure::Discrete(m) => m.mirror(i),
            LevyMeasure::Stable(m) => m.mirror(i),
        }
    }

    /// Mass scale used by the `Ψ = 0` threshold.
    pub fn scale(&self) -> f64 {
        match self {
            LevyMeasure::Discrete(m) => m.total_mass(),
            LevyMeasure::Stable(m) => m.angular_mass(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match self {
            LevyMeasure::Discrete(m) => m.is_degenerate(),
            LevyMeasure::Stable(m) => m.is_degenerate(),
        }
    }
}

impl From<DiscreteLevyMeasure> for LevyMeasure {
    fn from(m: DiscreteLevyMeasure) -> Self {
        LevyMeasure::Discrete(m)
    }
}

impl From<TruncatedStableMeasure> for LevyMeasure {
    fn from(m: TruncatedStableMeasure) -> Self {
        LevyMeasure::Stable(m)
    }
}

/// The jump weight `φ`, symmetric with `|φ| ≤ 1`.
///
/// For stable measures `φ` is evaluated on the angular atoms, i.e. it is
/// constant along rays.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpModulator {
    Constant(Complex64),
    /// 1 on the punctured coordinate axis `axis`, 0 elsewhere.
    AxisIndicator(usize),
    /// `a_j` on the punctured `j`-th axis, 0 off the axes.
    PerAxis(Vec<f64>),
    /// One sign per atom, in atom order.
    SignPattern(Vec<f64>),
    /// Explicit values at atom locations.
    Table(Vec<(Vec<f64>, Complex64)>),
}

fn single_axis(z: &[f64]) -> Option<usize> {
    let scale = z.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut hit = None;
    for (j, &x) in z.iter().enumerate() {
        if x.abs() > 1e-14 * scale {
            if hit.is_some() {
                return None;
            }
            hit = Some(j);
        }
    }
    hit
}

impl JumpModulator {
    /// Values of `φ` on `measure`'s modulated atoms, validated for
    /// `|φ| ≤ 1` and `φ(−z) = φ(z)`.
    ///
    /// Antisymmetric modulators are rejected: they produce the zero symbol.
    pub fn bind(&self, measure: &LevyMeasure) -> Result<Vec<Complex64>> {
        let atoms = measure.modulated_atoms();
        let dim = measure.dim();
        let values: Vec<Complex64> = match self {
            JumpModulator::Constant(c) => vec![*c; atoms.len()],
            JumpModulator::AxisIndicator(axis) => {
                if *axis >= dim {
                    return Err(invalid(format!(
                        "axis {axis} out of range for dimension {dim}"
                    )));
                }
                atoms
                    .iter()
                    .map(|a| {
                        if single_axis(&a.location) == Some(*axis) {
                            Complex64::new(1.0, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    })
                    .collect()
            }
            JumpModulator::PerAxis(coeffs) => {
                if coeffs.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: coeffs.len(),
                    });
                }
                atoms
                    .iter()
                    .map(|a| match single_axis(&a.location) {
                        Some(j) => Complex64::new(coeffs[j], 0.0),
                        None => Complex64::new(0.0, 0.0),
                    })
                    .collect()
            }
            JumpModulator::SignPattern(signs) => {
                if signs.len() != atoms.len() {
                    return Err(invalid(format!(
                        "sign pattern has {} entries for {} atoms",
                        signs.len(),
                        atoms.len()
                    )));
                }
                signs.iter().map(|&s| Complex64::new(s, 0.0)).collect()
            }
            JumpModulator::Table(entries) => atoms
                .iter()
                .map(|a| {
                    entries
                        .iter()
                        .find(|(loc, _)| {
                            loc.len() == a.location.len()
                                && same_location(loc, &a.location, a.norm())
                        })
                        .map(|(_, v)| *v)
                        .ok_or_else(|| {
                            invalid(format!("modulator undefined on atom {:?}", a.location))
                        })
                })
                .collect::<Result<_>>()?,
        };
        for (i, v) in values.iter().enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) || v.norm_sqr() > 1.0 {
                return Err(invalid(format!(
                    "|φ| exceeds 1 (or is not finite) on atom {i}: {v}"
                )));
            }
        }
        let mut antisymmetric = true;
        let mut symmetric = true;
        let mut nonzero = false;
        for (i, v) in values.iter().enumerate() {
            let w = values[measure.mirror(i)];
            if (v - w).abs() > 1e-15 {
                symmetric = false;
            }
            if (v + w).abs() > 1e-15 {
                antisymmetric = false;
            }
            nonzero |= v.abs() > 0.0;
        }
        if !symmetric {
            if antisymmetric && nonzero {
                return Err(invalid(
                    "antisymmetric modulator yields the zero symbol; rejected",
                ));
            }
            return Err(invalid("modulator is not symmetric under z -> -z"));
        }
        Ok(values)
    }
}

/// `c_α = −π / (2 sin(πα/2) Γ(1+α))`, so that
/// `∫_0^∞ (cos u − 1) u^{−1−α} du = c_α`.
pub fn stable_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(invalid(format!("alpha = {alpha} is outside (0, 2)")));
    }
    Ok(-PI / (2.0 * (PI * alpha / 2.0).sin() * gamma(1.0 + alpha)))
}

fn check_xi(xi: &[f64], dim: usize) -> Result<()> {
    if xi.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: xi.len(),
        });
    }
    if !xi.iter().all(|x| x.is_finite()) {
        return Err(invalid("frequency has a non-finite component"));
    }
    Ok(())
}

/// `cos θ − 1` without cancellation for small `θ`.
#[inline]
pub(crate) fn cos_minus_one(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    -2.0 * s * s
}

/// Radial profile `I(k) = ∫_ε^R (cos kr − 1) r^{−1−α} dr` of a truncated
/// stable measure.
#[derive(Debug, Clone, Copy)]
pub struct RadialIntegral {
    pub alpha: f64,
    pub epsilon: f64,
    pub outer_radius: Option<f64>,
    pub tol: f64,
}

impl RadialIntegral {
    pub fn eval(&self, k: f64) -> Result<f64> {
        let k = k.abs();
        if k == 0.0 {
            return Ok(0.0);
        }
        let scale = k.powf(self.alpha);
        let tol = self.tol / scale;
        let lo = k * self.epsilon;
        let hi = self.outer_radius.map(|r| k * r);
        Ok(scale * self.scaled(lo, hi, k, tol)?)
    }

    /// `∫_lo^hi (cos u − 1) u^{−1−α} du` with `hi = None` meaning ∞.
    fn scaled(&self, lo: f64, hi: Option<f64>, unit: f64, tol: f64) -> Result<f64> {
        const DIRECT_SPAN: f64 = 2000.0 * PI;
        let alpha = self.alpha;
        let beta = 1.0 + alpha;
        let body_end = lo.max(8.0 * PI);
        let mid = match hi {
            Some(h) => h.min(body_end),
            None => body_end,
        };
        let mut total = self.oscillatory_piece(lo, mid, unit, tol / 3.0)?;
        match hi {
            None => total += cos_tail(mid, beta, tol / 3.0)? - mid.powf(-alpha) / alpha,
            Some(h) if h > mid => {
                if h - mid <= DIRECT_SPAN {
                    total += self.oscillatory_piece(mid, h, unit, tol / 3.0)?;
                } else {
                    total += cos_tail(mid, beta, tol / 6.0)?
                        - cos_tail(h, beta, tol / 6.0)?
                        - (mid.powf(-alpha) - h.powf(-alpha)) / alpha;
                }
            }
            Some(_) => {}
        }
        Ok(total)
    }

    fn oscillatory_piece(&self, a: f64, b: f64, unit: f64, tol: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        let beta = 1.0 + self.alpha;
        let mut breaks = vec![a];
        // r = 1 split.
        if unit > a && unit < b {
            breaks.push(unit);
        }
        let mut m = (a / PI).floor() + 1.0;
        while m * PI < b {
            breaks.push(m * PI);
            m += 1.0;
        }
        breaks.push(b);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let q = integrate_with_breaks(
            |u: f64| cos_minus_one(u) * u.powf(-beta),
            &breaks,
            QuadOptions::absolute(tol).with_max_panels(50_000),
        )?;
        Ok(q.value)
    }
}

/// `∫_U^∞ cos(u) u^{−β} du`, evaluated on the rotated contour `u = U + iy`.
fn cos_tail(start: f64, beta: f64, tol: f64) -> Result<f64> {
    let q = integrate_with_breaks(
        |y: f64| {
            let w = Complex64::new(start, y).powf(-beta) * (-y).exp();
            (Complex64::i() * Complex64::from_polar(1.0, start) * w).re
        },
        &[0.0, 1.0, 4.0, 12.0, 40.0, 80.0],
        QuadOptions::absolute(tol),
    )?;
    Ok(q.value)
}

/// Characteristic exponent `Ψ(ξ) = ∫ (cos ξ·z − 1) ν(dz)`.
///
/// Exact finite summation for discrete measures; adaptive radial
/// quadrature with absolute tolerance [`DEFAULT_RADIAL_TOL`] for stable ones.
pub fn char_exponent(measure: &LevyMeasure, xi: &[f64]) -> Result<f64> {
    char_exponent_with_tol(measure, xi, DEFAULT_RADIAL_TOL)
}

pub fn char_exponent_with_tol(measure: &LevyMeasure, xi: &[f64], tol: f64) -> Result<f64> {
    check_xi(xi, measure.dim())?;
    match measure {
        LevyMeasure::Discrete(m) => Ok(m
            .atoms()
            .iter()
            .map(|a| a.weight * cos_minus_one(dot(xi, &a.location)))
            .sum()),
        LevyMeasure::Stable(m) => {
            let radial = m.radial(tol / m.angular_atoms().len() as f64);
            m.angular_atoms()
                .iter()
                .map(|a| Ok(a.weight * radial.eval(dot(xi, &a.location))?))
                .sum()
        }
    }
}

/// Closed form `c_α ∫ |ξ·θ|^α μ(dθ)` of the untruncated stable exponent.
pub fn char_exponent_stable_closed_form(
    alpha: f64,
    xi: &[f64],
    angular_atoms: &[Atom],
) -> Result<f64> {
    let c = stable_constant(alpha)?;
    if !xi.iter().all(|x| x.is_finite()) {
        return Err(invalid("frequency has a non-finite component"));
    }
    let mut s = 0.0;
    for a in angular_atoms {
        if a.location.len() != xi.len() {
            return Err(Error::DimensionMismatch {
                expected: xi.len(),
                found: a.location.len(),
            });
        }
        s += a.weight * dot(xi, &a.location).abs().powf(alpha);
    }
    Ok(c * s)
}

/// Poisson probabilities `P(N = n)` for `n = 0..=n_max` and the tail
/// `P(N > n_max)`, with `n_max` the smallest count whose tail is below `tol`.
pub(crate) fn poisson_truncation(mean: f64, tol: f64) -> (Vec<f64>, f64) {
    if mean == 0.0 {
        return (vec![1.0], 0.0);
    }
    let horizon = (mean + 40.0 * mean.sqrt() + 60.0).ceil() as usize;
    let pmf: Vec<f64> = (0..=horizon)
        .map(|n| (-mean + n as f64 * mean.ln() - ln_factorial(n as u64)).exp())
        .collect();
    // tails[n] = P(N > n), summed from the far end.
    let mut tails = vec![0.0; horizon + 1];
    let mut acc = 0.0;
    for n in (0..horizon).rev() {
        acc += pmf[n + 1];
        tails[n] = acc;
    }
    let n_max = (0..=horizon).find(|&n| tails[n] < tol).unwrap_or(horizon);
    (pmf[..=n_max].to_vec(), tails[n_max])
}

/// Lattice points of a discrete measure with normalized jump probabilities.
#[derive(Debug, Clone)]
pub struct LatticeJumps {
    pub dim: usize,
    pub step: f64,
    pub offsets: Vec<Vec<i64>>,
    pub weights: Vec<f64>,
    pub total_mass: f64,
}

impl LatticeJumps {
    pub fn new(measure: &DiscreteLevyMeasure, step: f64) -> Result<Self> {
        let offsets = measure.lattice_offsets(step)?;
        Ok(Self {
            dim: measure.dim(),
            step,
            offsets,
            weights: measure.atoms().iter().map(|a| a.weight).collect(),
            total_mass: measure.total_mass(),
        })
    }

    /// Convolution powers `ν̃^{*n}` for `n = 0..=n_max`.
    pub fn convolution_powers(&self, n_max: usize) -> Vec<BTreeMap<Vec<i64>, f64>> {
        let mut powers = Vec::with_capacity(n_max + 1);
        let mut current = BTreeMap::new();
        current.insert(vec![0i64; self.dim], 1.0);
        powers.push(current.clone());
        for _ in 0..n_max {
            let mut next: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
            for (point, mass) in &current {
                for (off, w) in self.offsets.iter().zip(&self.weights) {
                    let key: Vec<i64> = point.iter().zip(off).map(|(a, b)| a + b).collect();
                    *next.entry(key).or_insert(0.0) += mass * w / self.total_mass;
                }
            }
            current = next;
            powers.push(current.clone());
        }
        powers
    }
}

/// Truncated series `p_t = e^{−t|ν|} Σ_{n ≤ n_max} tⁿ/n! ν^{*n}` on the
/// lattice `step·Z^d`.
#[derive(Debug, Clone)]
pub struct TransitionMeasure {
    pub dim: usize,
    pub step: f64,
    pub time: f64,
    pub n_max: usize,
    /// Mass discarded by the truncation, `P(N > n_max)`.
    pub tail_bound: f64,
    atoms: BTreeMap<Vec<i64>, f64>,
}

impl TransitionMeasure {
    pub(crate) fn from_powers(
        jumps: &LatticeJumps,
        powers: &[BTreeMap<Vec<i64>, f64>],
        time: f64,
        tol: f64,
    ) -> Self {
        let (pmf, tail) = poisson_truncation(time * jumps.total_mass, tol);
        let n_max = pmf.len() - 1;
        assert!(n_max < powers.len(), "not enough convolution powers");
        let mut atoms: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (n, prob) in pmf.iter().enumerate() {
            for (k, v) in &powers[n] {
                *atoms.entry(k.clone()).or_insert(0.0) += prob * v;
            }
        }
        Self {
            dim: jumps.dim,
            step: jumps.step,
            time,
            n_max,
            tail_bound: tail,
            atoms,
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Vec<i64>, &f64)> {
        self.atoms.iter()
    }

    pub fn weight(&self, point: &[i64]) -> f64 {
        self.atoms.get(point).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.values().sum()
    }

    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    /// `Σ_z e^{iξ·z} p_t(z)` with `z` in physical units.
    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        self.atoms
            .iter()
            .map(|(k, w)| {
                let phase: f64 = k
                    .iter()
                    .zip(xi)
                    .map(|(&m, x)| m as f64 * self.step * x)
                    .sum();
                Complex64::from_polar(*w, phase)
            })
            .sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.atoms.iter().all(|(k, w)| {
            let neg: Vec<i64> = k.iter().map(|x| -x).collect();
            (self.weight(&neg) - w).abs() <= tol
        })
    }

    /// Convolution on the lattice; times and tail bounds add.
    pub fn convolve(&self, other: &TransitionMeasure) -> TransitionMeasure {
        let mut atoms: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (a, wa) in &self.atoms {
            for (b, wb) in &other.atoms {
                let key: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                *atoms.entry(key).or_insert(0.0) += wa * wb;
            }
        }
        TransitionMeasure {
            dim: self.dim,
            step: self.step,
            time: self.time + other.time,
            n_max: self.n_max + other.n_max,
            tail_bound: self.tail_bound + other.tail_bound,
            atoms,
        }
    }

    /// Wraps the measure onto the periodic lattice with `dims` points per
    /// axis (row-major).
    pub fn periodize(&self, dims: &[usize]) -> Vec<f64> {
        let total: usize = dims.iter().product();
        let mut out = vec![0.0; total];
        for (k, w) in &self.atoms {
            let mut idx = 0usize;
            for (m, &n) in k.iter().zip(dims) {
                idx = idx * n + m.rem_euclid(n as i64) as usize;
            }
            out[idx] += w;
        }
        out
    }
}

/// Transition measure `p_t` of the compound Poisson process with Lévy
/// measure `measure`, whose atoms must lie on `step·Z^d`.
pub fn transition_measure(
    measure: &DiscreteLevyMeasure,
    step: f64,
    t: f64,
    tol: f64,
) -> Result<TransitionMeasure> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid("time must be finite and nonnegative"));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid("tolerance must lie in (0, 1)"));
    }
    let jumps = LatticeJumps::new(measure, step)?;
    let mean = t * jumps.total_mass;
    if mean > MAX_POISSON_MEAN {
        return Err(invalid(format!(
            "t·|ν| = {mean} exceeds the series guard {MAX_POISSON_MEAN}"
        )));
    }
    let (pmf, _) = poisson_truncation(mean, tol);
    let powers = jumps.convolution_powers(pmf.len() - 1);
    Ok(TransitionMeasure::from_powers(&jumps, &powers, t, tol))
}

/// Both sides of the Lévy–Khinchin formula `p̂_t(ξ) = e^{tΨ(ξ)}`.
pub fn levy_khinchin_check(
    measure: &DiscreteLevyMeasure,
    step: f64,
    t: f64,
    xi: &[f64],
    tol: f64,
) -> Result<(Complex64, f64)> {
    check_xi(xi, measure.dim())?;
    let p = transition_measure(measure, step, t, tol)?;
    let psi = char_exponent(&LevyMeasure::Discrete(measure.clone()), xi)?;
    Ok((p.fourier(xi), (t * psi).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn plus_minus_one(weight: f64) -> DiscreteLevyMeasure {
        DiscreteLevyMeasure::nearest_neighbour(1, 1.0, weight).unwrap()
    }

    #[test]
    fn four_neighbour_exponent_at_pi_pi() {
        let m = LevyMeasure::Discrete(DiscreteLevyMeasure::nearest_neighbour(2, 1.0, 1.0).unwrap());
        assert_abs_diff_eq!(char_exponent(&m, &[PI, PI]).unwrap(), -8.0, epsilon = 1e-14);
        assert_eq!(char_exponent(&m, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn non_finite_frequency_rejected() {
        let m = LevyMeasure::Discrete(plus_minus_one(1.0));
        assert!(matches!(
            char_exponent(&m, &[f64::NAN]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn asymmetric_measure_rejected() {
        let atoms = vec![Atom::new(vec![1.0], 1.0), Atom::new(vec![-1.0], 2.0)];
        assert!(DiscreteLevyMeasure::new(1, atoms).is_err());
        let atoms = vec![Atom::new(vec![1.0], 1.0), Atom::new(vec![2.0], 1.0)];
        assert!(DiscreteLevyMeasure::new(1, atoms).is_err());
        let atoms = vec![Atom::new(vec![0.0], 1.0)];
        assert!(DiscreteLevyMeasure::new(1, atoms).is_err());
    }

    #[test]
    fn stable_constant_at_one() {
        assert_abs_diff_eq!(stable_constant(1.0).unwrap(), -PI / 2.0, epsilon = 1e-15);
        assert!(stable_constant(2.0).is_err());
        assert!(stable_constant(0.0).is_err());
    }

    #[test]
    fn untruncated_cauchy_exponent_matches_oracle() {
        // Oracle: ∫_0^∞ (cos 2r − 1) r^{−2} dr = −π, two atoms ±1. Brute
        // force over [0, A] on half-periods; the tail is −1/A + O(A^{−3}).
        let a = 200.0 * PI;
        let breaks: Vec<f64> = (0..=400).map(|i| i as f64 * PI / 2.0).collect();
        let body = integrate_with_breaks(
            |r: f64| ((2.0 * r).cos() - 1.0) / (r * r),
            &breaks,
            QuadOptions::absolute(1e-11).with_max_panels(100_000),
        )
        .unwrap();
        assert_abs_diff_eq!(body.value - 1.0 / a, -PI, epsilon = 1e-7);
        let m = LevyMeasure::Stable(TruncatedStableMeasure::axis(1, 1.0, 0.0, None).unwrap());
        let psi = char_exponent(&m, &[2.0]).unwrap();
        assert_abs_diff_eq!(psi, -2.0 * PI, epsilon = 1e-9);
        let closed = char_exponent_stable_closed_form(1.0, &[2.0], m.modulated_atoms()).unwrap();
        assert_abs_diff_eq!(psi, closed, epsilon = 1e-9);
    }

    #[test]
    fn axis_stable_exponent_is_twice_the_per_axis_sum() {
        // With atoms at ±e_j each axis contributes 2 c_α |ξ_j|^α, so the
        // exponent is twice c_α(|ξ_1|^α + |ξ_2|^α); the ratio M is unaffected.
        let alpha = 1.5;
        let m = LevyMeasure::Stable(TruncatedStableMeasure::axis(2, alpha, 0.0, None).unwrap());
        let xi = [0.8, -1.7];
        let per_axis_sum =
            stable_constant(alpha).unwrap() * (xi[0].abs().powf(alpha) + xi[1].abs().powf(alpha));
        let quad = char_exponent(&m, &xi).unwrap();
        assert_abs_diff_eq!(quad, 2.0 * per_axis_sum, epsilon = 1e-8);
    }

    #[test]
    fn half_stable_closed_form_matches_quadrature() {
        let m = LevyMeasure::Stable(TruncatedStableMeasure::axis(1, 0.5, 0.0, None).unwrap());
        let closed = char_exponent_stable_closed_form(0.5, &[1.0], m.modulated_atoms()).unwrap();
        let quad = char_exponent(&m, &[1.0]).unwrap();
        assert_abs_diff_eq!(closed, quad, epsilon = 1e-9);
        assert_eq!(
            char_exponent_stable_closed_form(0.5, &[0.0], m.modulated_atoms()).unwrap(),
            0.0
        );
    }

    #[test]
    fn finite_outer_radius_long_span() {
        // Outer radius far beyond the direct span exercises the two-tail route.
        let far = TruncatedStableMeasure::axis(1, 1.3, 1e-3, Some(1e7)).unwrap();
        let inf = TruncatedStableMeasure::axis(1, 1.3, 1e-3, None).unwrap();
        let a = char_exponent(&LevyMeasure::Stable(far), &[3.0]).unwrap();
        let b = char_exponent(&LevyMeasure::Stable(inf), &[3.0]).unwrap();
        // Missing mass beyond R is bounded by 2·2·R^{−α}/α.
        assert!((a - b).abs() < 4.0 * 1e7f64.powf(-1.3) / 1.3 + 1e-9);
    }

    #[test]
    fn transition_at_time_zero_is_dirac() {
        let p = transition_measure(&plus_minus_one(0.5), 1.0, 0.0, 1e-12).unwrap();
        assert_eq!(p.support_len(), 1);
        assert_eq!(p.weight(&[0]), 1.0);
    }

    #[test]
    fn transition_origin_weight_matches_direct_series() {
        // Independent oracle: e^{-1} Σ_{n even} C(n, n/2)/(2^n n!).
        let mut oracle = 0.0;
        let mut fact = 1.0f64;
        for n in 0..40usize {
            if n > 0 {
                fact *= n as f64;
            }
            if n % 2 == 0 {
                let mut binom = 1.0f64;
                for k in 0..n / 2 {
                    binom *= (n - k) as f64 / (k + 1) as f64;
                }
                oracle += binom / 2f64.powi(n as i32) / fact;
            }
        }
        oracle *= (-1.0f64).exp();
        let p = transition_measure(&plus_minus_one(0.5), 1.0, 1.0, 1e-14).unwrap();
        assert_abs_diff_eq!(p.weight(&[0]), oracle, epsilon = 1e-14);
        assert!(p.is_symmetric(1e-16));
        let mass = p.total_mass();
        assert!((1.0 - 1e-14..=1.0 + 1e-15).contains(&mass));
    }

    #[test]
    fn off_lattice_atoms_rejected() {
        let m = DiscreteLevyMeasure::nearest_neighbour(1, 1.5, 1.0).unwrap();
        assert!(matches!(
            transition_measure(&m, 1.0, 1.0, 1e-12),
            Err(Error::UnsupportedMeasure(_))
        ));
    }

    #[test]
    fn series_guard() {
        let m = plus_minus_one(10.0);
        assert!(transition_measure(&m, 1.0, 3.0, 1e-12).is_err());
    }

    #[test]
    fn khinchin_formula_holds() {
        let m = plus_minus_one(1.0);
        let tol = 1e-12;
        let (lhs, rhs) = levy_khinchin_check(&m, 1.0, 0.7, &[1.3], tol).unwrap();
        assert!((lhs - rhs).abs() < 10.0 * tol);
        let (lhs, rhs) = levy_khinchin_check(&m, 1.0, 0.0, &[1.3], tol).unwrap();
        assert_eq!((lhs, rhs), (Complex64::new(1.0, 0.0), 1.0));
    }

    #[test]
    fn modulator_validation() {
        let m = LevyMeasure::Discrete(plus_minus_one(1.0));
        assert!(JumpModulator::Constant(Complex64::new(1.5, 0.0))
            .bind(&m)
            .is_err());
        let err = JumpModulator::SignPattern(vec![1.0, -1.0])
            .bind(&m)
            .unwrap_err();
        assert!(err.to_string().contains("antisymmetric"));
        let vals = JumpModulator::SignPattern(vec![-1.0, -1.0])
            .bind(&m)
            .unwrap();
        assert_eq!(vals, vec![Complex64::new(-1.0, 0.0); 2]);
        let tbl = JumpModulator::Table(vec![(vec![1.0], Complex64::new(0.0, 1.0))]);
        assert!(tbl.bind(&m).is_err(), "−1 missing from the table");
    }

    #[test]
    fn axis_indicator_on_diagonal_atoms_is_zero() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let atoms = vec![
            Atom::new(vec![s, s], 1.0),
            Atom::new(vec![-s, -s], 1.0),
            Atom::new(vec![1.0, 0.0], 1.0),
            Atom::new(vec![-1.0, 0.0], 1.0),
        ];
        let m =
            LevyMeasure::Stable(TruncatedStableMeasure::new(2, 1.0, 1e-3, None, atoms).unwrap());
        let v = JumpModulator::AxisIndicator(0).bind(&m).unwrap();
        assert_eq!(
            v.iter().map(|c| c.re).collect::<Vec<_>>(),
            vec![0.0, 0.0, 1.0, 1.0]
        );
    }

    #[test]
    fn degenerate_support_detected() {
        let m = DiscreteLevyMeasure::new(
            2,
            vec![
                Atom::new(vec![1.0, 1.0], 1.0),
                Atom::new(vec![-1.0, -1.0], 1.0),
            ],
        )
        .unwrap();
        assert!(m.is_degenerate());
        assert!(!DiscreteLevyMeasure::nearest_neighbour(2, 1.0, 1.0)
            .unwrap()
            .is_degenerate());
    }
}
