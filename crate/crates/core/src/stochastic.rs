//! Compound Poisson paths on a periodic lattice, the parabolic martingale
//! `G_t = P_{t,u}f(x + X_{s,t})`, its transform `F_t` by a jump modulator,
//! and Monte Carlo checks of the identities relating them.
//!
//! The state space is the torus `(step·Z / N)^d`. On it `P_τ f` is the
//! finite convolution `f * p_τ`, evaluated per Fourier mode as
//! `f̂_k e^{τΨ_k}`, which is exact.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::levy_measure::{
    cos_minus_one, poisson_truncation, transition_measure, Atom, DiscreteLevyMeasure,
    JumpModulator, LatticeJumps, LevyMeasure, TransitionMeasure,
};
use crate::quadrature::gauss_legendre_on;
use crate::symbol::{MultiplierSymbol, SymbolKind};
use crate::transform::{apply_multiplier, GridFunction, PStar};

/// Largest `|s|·|ν|` accepted by the projection check.
pub const MAX_WINDOW_MASS: f64 = 20.0;

/// Paths per deterministic reduction chunk.
const CHUNK: usize = 1024;

/// Compensator time-quadrature tolerance per unit time.
pub const DEFAULT_COMPENSATOR_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Ensemble plumbing

/// Random stream of path `index` under `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `f` on `n_paths` independent streams, returning results in path
/// order regardless of the worker count.
pub fn run_ensemble<T, F>(n_paths: usize, seed: u64, stream_offset: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..n_paths)
        .into_par_iter()
        .map(|i| f(&mut path_rng(seed, stream_offset + i as u64)))
        .collect()
}

/// Sum in a fixed binary-tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                n,
            };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = if n > 1 {
            pairwise_sum(&dev) / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        }
    }

    /// `|mean − target| ≤ k·stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.stderr
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            mean: self.mean * c,
            stderr: self.stderr * c.abs(),
            n: self.n,
        }
    }
}

/// Per-coordinate means and standard errors of vector-valued samples,
/// reduced chunk by chunk in path order.
fn vector_moments<F>(
    n_paths: usize,
    seed: u64,
    stream_offset: u64,
    len: usize,
    f: F,
) -> Result<(Vec<Complex64>, Vec<f64>)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Vec<Complex64>> + Sync,
{
    if n_paths < 2 {
        return Err(invalid("need at least two paths"));
    }
    let chunks: Vec<(Vec<Complex64>, Vec<f64>)> = (0..n_paths.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut sum = vec![Complex64::new(0.0, 0.0); len];
            let mut sq = vec![0.0; len];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_paths) {
                let v = f(&mut path_rng(seed, stream_offset + i as u64))?;
                for ((s, q), x) in sum.iter_mut().zip(sq.iter_mut()).zip(&v) {
                    *s += x;
                    *q += x.norm_sqr();
                }
            }
            Ok((sum, sq))
        })
        .collect::<Result<_>>()?;
    let mut sum = vec![Complex64::new(0.0, 0.0); len];
    let mut sq = vec![0.0; len];
    for (cs, cq) in &chunks {
        sum.iter_mut().zip(cs).for_each(|(a, b)| *a += b);
        sq.iter_mut().zip(cq).for_each(|(a, b)| *a += b);
    }
    let n = n_paths as f64;
    let mean: Vec<Complex64> = sum.iter().map(|s| s / n).collect();
    let stderr = mean
        .iter()
        .zip(&sq)
        .map(|(m, q)| (((q - n * m.norm_sqr()) / (n - 1.0)).max(0.0) / n).sqrt())
        .collect();
    Ok((mean, stderr))
}

// ---------------------------------------------------------------------------
// Paths

/// Observation window `(s, u]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub s: f64,
    pub u: f64,
}

impl Window {
    pub fn new(s: f64, u: f64) -> Result<Self> {
        if !(s.is_finite() && u.is_finite() && s < u) {
            return Err(invalid(format!(
                "window needs finite s < u, got ({s}, {u})"
            )));
        }
        Ok(Self { s, u })
    }

    pub fn length(&self) -> f64 {
        self.u - self.s
    }
}

/// Jump times `S_i ∈ (s, u]` and lattice jumps `Z_i` of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonPath {
    pub window: Window,
    dim: usize,
    times: Vec<f64>,
    atoms: Vec<usize>,
    jumps: Vec<Vec<i64>>,
}

impl PoissonPath {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn n_jumps(&self) -> usize {
        self.times.len()
    }
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    /// Index of the measure atom drawn at each jump.
    pub fn atoms(&self) -> &[usize] {
        &self.atoms
    }
    pub fn jumps(&self) -> &[Vec<i64>] {
        &self.jumps
    }

    fn position_counting(&self, t: f64, inclusive: bool) -> Vec<i64> {
        let mut x = vec![0i64; self.dim];
        for (time, z) in self.times.iter().zip(&self.jumps) {
            if *time < t || (inclusive && *time == t) {
                x.iter_mut().zip(z).for_each(|(a, b)| *a += b);
            }
        }
        x
    }

    /// `X_{s,t}`, including a jump at `t`.
    pub fn position_at(&self, t: f64) -> Vec<i64> {
        self.position_counting(t, true)
    }

    /// `X_{s,t−}`, excluding a jump at `t`.
    pub fn position_before(&self, t: f64) -> Vec<i64> {
        self.position_counting(t, false)
    }
}

/// Draws a path: exponential gaps with rate `|ν|`, jumps from `ν/|ν|`.
pub fn sample_path<R: Rng + ?Sized>(
    jumps: &LatticeJumps,
    window: Window,
    rng: &mut R,
) -> Result<PoissonPath> {
    if !(jumps.total_mass > 0.0) || jumps.offsets.is_empty() {
        return Err(invalid("cannot simulate an empty Lévy measure"));
    }
    let gaps = Exp::new(jumps.total_mass).map_err(|e| invalid(e.to_string()))?;
    let pick = WeightedIndex::new(&jumps.weights).map_err(|e| invalid(e.to_string()))?;
    let mut times = Vec::new();
    let mut atoms = Vec::new();
    let mut t = window.s;
    loop {
        t += gaps.sample(rng);
        if t > window.u {
            break;
        }
        let j = pick.sample(rng);
        times.push(t);
        atoms.push(j);
    }
    let offsets = atoms.iter().map(|&j| jumps.offsets[j].clone()).collect();
    Ok(PoissonPath {
        window,
        dim: jumps.dim,
        times,
        atoms,
        jumps: offsets,
    })
}

/// [`sample_path`] on the stream `(seed, index)`.
pub fn sample_path_seeded(
    jumps: &LatticeJumps,
    window: Window,
    seed: u64,
    index: u64,
) -> Result<PoissonPath> {
    sample_path(jumps, window, &mut path_rng(seed, index))
}

// ---------------------------------------------------------------------------
// Jump system and parabolic fields

/// A lattice Lévy measure with its modulator bound to the atoms.
#[derive(Debug, Clone)]
pub struct JumpSystem {
    measure: DiscreteLevyMeasure,
    modulator: JumpModulator,
    jumps: LatticeJumps,
    phi: Vec<Complex64>,
}

impl JumpSystem {
    pub fn new(measure: DiscreteLevyMeasure, modulator: JumpModulator, step: f64) -> Result<Self> {
        let jumps = LatticeJumps::new(&measure, step)?;
        let phi = modulator.bind(&LevyMeasure::Discrete(measure.clone()))?;
        Ok(Self {
            measure,
            modulator,
            jumps,
            phi,
        })
    }

    pub fn measure(&self) -> &DiscreteLevyMeasure {
        &self.measure
    }
    pub fn modulator(&self) -> &JumpModulator {
        &self.modulator
    }
    pub fn jumps(&self) -> &LatticeJumps {
        &self.jumps
    }
    pub fn phi(&self) -> &[Complex64] {
        &self.phi
    }
    pub fn dim(&self) -> usize {
        self.jumps.dim
    }
    pub fn step(&self) -> f64 {
        self.jumps.step
    }
    pub fn total_mass(&self) -> f64 {
        self.jumps.total_mass
    }

    /// The same measure with a different modulator.
    pub fn with_modulator(&self, modulator: JumpModulator) -> Result<Self> {
        Self::new(self.measure.clone(), modulator, self.step())
    }

    /// `Σ_z |φ(z)| ν(z)`.
    pub fn modulated_mass(&self) -> f64 {
        self.jumps
            .weights
            .iter()
            .zip(&self.phi)
            .map(|(w, p)| w * p.norm())
            .sum()
    }

    /// The finite-time symbol `m_s` of this measure and modulator.
    pub fn finite_time_symbol(&self, s: f64) -> Result<MultiplierSymbol> {
        MultiplierSymbol::new(SymbolKind::FiniteTime {
            measure: LevyMeasure::Discrete(self.measure.clone()),
            modulator: self.modulator.clone(),
            s,
        })
    }
}

/// Per-mode data of `P_{v,u}f` on the periodic lattice.
#[derive(Debug, Clone)]
pub struct ParabolicField {
    dims: Vec<usize>,
    u: f64,
    /// `f̂_k / N^d`
    coeffs: Vec<Complex64>,
    /// `Ψ_k`
    psi: Vec<f64>,
    /// `Σ_z φ(z)ν(z)(cos θ_k·z − 1)`
    phi_exponent: Vec<Complex64>,
    /// `Σ_z |φ(z)|ν(z)(cos θ_k·z + 1)`
    abs_exponent: Vec<Complex64>,
    /// `e^{2πi m/N_a}` per axis
    roots: Vec<Vec<Complex64>>,
}

/// How the compensator integral between jumps is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompensatorRule {
    /// Closed-form time integral of each Fourier mode.
    Exact,
    /// Gauss–Legendre in `v` starting from `nodes_per_unit` nodes per unit
    /// time, doubled until successive values agree to `tol` per unit time.
    GaussLegendre { nodes_per_unit: usize, tol: f64 },
}

impl CompensatorRule {
    pub fn gauss_legendre() -> Self {
        CompensatorRule::GaussLegendre {
            nodes_per_unit: 8,
            tol: DEFAULT_COMPENSATOR_TOL,
        }
    }
}

fn unsigned_mode(flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    let mut rem = flat;
    for a in (0..dims.len()).rev() {
        out[a] = rem % dims[a];
        rem /= dims[a];
    }
    out
}

impl ParabolicField {
    /// `f` must be sampled on the lattice: period `N_a · step` on each axis.
    pub fn new(system: &JumpSystem, f: &GridFunction, u: f64) -> Result<Self> {
        let step = system.step();
        if f.dim() != system.dim() {
            return Err(Error::DimensionMismatch {
                expected: system.dim(),
                found: f.dim(),
            });
        }
        for (n, l) in f.dims().iter().zip(f.period()) {
            if ((*n as f64) * step - l).abs() > 1e-9 * l {
                return Err(invalid(format!(
                    "grid period {l} is not {n} lattice steps of {step}"
                )));
            }
        }
        let dims = f.dims().to_vec();
        let total = f.len() as f64;
        let coeffs = f
            .forward()
            .into_iter()
            .map(|z| z / total)
            .collect::<Vec<_>>();
        let mut psi = Vec::with_capacity(coeffs.len());
        let mut phi_exponent = Vec::with_capacity(coeffs.len());
        let mut abs_exponent = Vec::with_capacity(coeffs.len());
        for flat in 0..coeffs.len() {
            let k = unsigned_mode(flat, &dims);
            let (mut p, mut pe, mut ae) = (0.0, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for ((off, w), phi) in system
                .jumps
                .offsets
                .iter()
                .zip(&system.jumps.weights)
                .zip(&system.phi)
            {
                let theta: f64 = off
                    .iter()
                    .zip(&k)
                    .zip(&dims)
                    .map(|((&z, &k), &n)| {
                        2.0 * PI * ((k as i64 * z).rem_euclid(n as i64)) as f64 / n as f64
                    })
                    .sum();
                let cm1 = cos_minus_one(theta);
                p += w * cm1;
                pe += phi * (w * cm1);
                ae += Complex64::new(phi.norm() * w * (cm1 + 2.0), 0.0);
            }
            psi.push(p);
            phi_exponent.push(pe);
            abs_exponent.push(ae);
        }
        let roots = dims
            .iter()
            .map(|&n| {
                (0..n)
                    .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64))
                    .collect()
            })
            .collect();
        Ok(Self {
            dims,
            u,
            coeffs,
            psi,
            phi_exponent,
            abs_exponent,
            roots,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.u
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn exponents(&self) -> &[f64] {
        &self.psi
    }

    fn phase(&self, flat: usize, x: &[i64]) -> Complex64 {
        let mut rem = flat;
        let mut out = Complex64::new(1.0, 0.0);
        for a in (0..self.dims.len()).rev() {
            let n = self.dims[a];
            let k = rem % n;
            rem /= n;
            let idx = (k as i64 * x[a].rem_euclid(n as i64)).rem_euclid(n as i64) as usize;
            out *= self.roots[a][idx];
        }
        out
    }

    /// `P_{v,u}f(x) = Σ_y p_{u−v}(y) f(x + y)` for `v ≤ u`.
    pub fn value(&self, v: f64, x: &[i64]) -> Complex64 {
        let tau = self.u - v;
        self.coeffs
            .iter()
            .zip(&self.psi)
            .enumerate()
            .map(|(k, (c, p))| c * (tau * p).exp() * self.phase(k, x))
            .sum()
    }

    fn time_integral(&self, spectrum: &[Complex64], a: f64, b: f64, x: &[i64]) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&self.psi)
            .zip(spectrum)
            .enumerate()
            .map(|(k, ((c, &p), s))| c * s * mode_time_integral(p, self.u, a, b) * self.phase(k, x))
            .sum()
    }

    /// `∫_a^b Σ_z [P_{v,u}f(x + z) − P_{v,u}f(x)] φ(z) ν(z) dv`, exactly.
    pub fn compensator(&self, a: f64, b: f64, x: &[i64]) -> Complex64 {
        self.time_integral(&self.phi_exponent, a, b, x)
    }

    /// `∫_a^b Σ_z [P_{v,u}f(x + z) + P_{v,u}f(x)] |φ(z)| ν(z) dv`, exactly.
    pub fn abs_compensator(&self, a: f64, b: f64, x: &[i64]) -> Complex64 {
        self.time_integral(&self.abs_exponent, a, b, x)
    }

    /// The compensator by Gauss–Legendre quadrature in `v`.
    pub fn compensator_gl(
        &self,
        system: &JumpSystem,
        a: f64,
        b: f64,
        x: &[i64],
        nodes_per_unit: usize,
        tol: f64,
    ) -> Result<Complex64> {
        if b <= a {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let integrand = |v: f64| -> Complex64 {
            let here = self.value(v, x);
            system
                .jumps
                .offsets
                .iter()
                .zip(&system.jumps.weights)
                .zip(&system.phi)
                .map(|((z, w), phi)| {
                    let y: Vec<i64> = x.iter().zip(z).map(|(p, q)| p + q).collect();
                    (self.value(v, &y) - here) * phi * *w
                })
                .sum()
        };
        let rule = |n: usize| -> Complex64 {
            gauss_legendre_on(n, a, b)
                .into_iter()
                .map(|(v, w)| integrand(v) * w)
                .sum()
        };
        let mut n = ((nodes_per_unit as f64 * (b - a)).ceil() as usize).max(2);
        let mut prev = rule(n);
        for _ in 0..12 {
            n *= 2;
            let next = rule(n);
            if (next - prev).norm() <= tol * (b - a) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::ConvergenceFailure {
            estimate: prev.norm(),
            error: f64::NAN,
            tol: tol * (b - a),
        })
    }
}

/// `∫_a^b e^{(u−v)Ψ} dv`.
fn mode_time_integral(psi: f64, u: f64, a: f64, b: f64) -> f64 {
    if psi == 0.0 {
        return b - a;
    }
    ((u - b) * psi).exp() * ((b - a) * psi).exp_m1() / psi
}

// ---------------------------------------------------------------------------
// Martingale pair

/// `(t, G_t, F_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub t: f64,
    pub g: Complex64,
    pub f: Complex64,
}

/// One path's trajectory of `G` and `F` with their quadratic variations.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingalePair {
    pub x: Vec<i64>,
    pub window: Window,
    /// `P_{s,u}f(x)`
    pub g_initial: Complex64,
    pub g_final: Complex64,
    pub f_final: Complex64,
    /// `[G,G]_u`, including `|P_{s,u}f(x)|²`.
    pub qv_g: f64,
    /// `[F,F]_u`
    pub qv_f: f64,
    pub checkpoints: Vec<Checkpoint>,
    /// Jumps at which `[G,G] − [F,F]` decreased, judged on the increment
    /// `|ΔG|² − |ΔF|²` so rounding in the running sums cannot trigger it.
    pub gap_violations: usize,
    pub n_jumps: usize,
}

fn shifted(x: &[i64], z: &[i64]) -> Vec<i64> {
    x.iter().zip(z).map(|(a, b)| a + b).collect()
}

/// Evolves `G_t` and `F_t = Σ φ(ΔX)ΔG − compensator` along `path` from the
/// base point `x`, recording both at the sorted `checkpoints` in `[s, u]`.
pub fn evolve_martingales(
    path: &PoissonPath,
    x: &[i64],
    field: &ParabolicField,
    system: &JumpSystem,
    checkpoints: &[f64],
    rule: CompensatorRule,
) -> Result<MartingalePair> {
    let w = path.window;
    if (field.horizon() - w.u).abs() > 0.0 {
        return Err(invalid("field horizon differs from the path window end"));
    }
    if x.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: x.len(),
        });
    }
    if checkpoints.windows(2).any(|c| c[1] < c[0])
        || checkpoints.iter().any(|&c| c < w.s || c > w.u)
    {
        return Err(invalid("checkpoints must be sorted and inside the window"));
    }
    let comp = |a: f64, b: f64, y: &[i64]| -> Result<Complex64> {
        match rule {
            CompensatorRule::Exact => Ok(field.compensator(a, b, y)),
            CompensatorRule::GaussLegendre {
                nodes_per_unit,
                tol,
            } => field.compensator_gl(system, a, b, y, nodes_per_unit, tol),
        }
    };
    let g_initial = field.value(w.s, x);
    let mut qv_g = g_initial.norm_sqr();
    let mut qv_f = 0.0;
    let mut violations = 0;
    let mut f_val = Complex64::new(0.0, 0.0);
    let mut pos = x.to_vec();
    let mut cur = w.s;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0;
    for ((&t, z), &atom) in path.times.iter().zip(&path.jumps).zip(&path.atoms) {
        while next_cp < checkpoints.len() && checkpoints[next_cp] < t {
            let c = checkpoints[next_cp];
            out.push(Checkpoint {
                t: c,
                g: field.value(c, &pos),
                f: f_val - comp(cur, c, &pos)?,
            });
            next_cp += 1;
        }
        f_val -= comp(cur, t, &pos)?;
        let after = shifted(&pos, z);
        let dg = field.value(t, &after) - field.value(t, &pos);
        let df = dg * system.phi[atom];
        f_val += df;
        qv_g += dg.norm_sqr();
        qv_f += df.norm_sqr();
        if dg.norm_sqr() - df.norm_sqr() < 0.0 {
            violations += 1;
        }
        pos = after;
        cur = t;
    }
    while next_cp < checkpoints.len() {
        let c = checkpoints[next_cp];
        out.push(Checkpoint {
            t: c,
            g: field.value(c, &pos),
            f: f_val - comp(cur, c, &pos)?,
        });
        next_cp += 1;
    }
    f_val -= comp(cur, w.u, &pos)?;
    Ok(MartingalePair {
        x: x.to_vec(),
        window: w,
        g_initial,
        g_final: field.value(w.u, &pos),
        f_final: f_val,
        qv_g,
        qv_f,
        checkpoints: out,
        gap_violations: violations,
        n_jumps: path.n_jumps(),
    })
}

/// The dominating process `|F|_t` at `t = u`, built on the field of `|f|`.
pub fn evolve_abs_process(
    path: &PoissonPath,
    x: &[i64],
    abs_field: &ParabolicField,
    system: &JumpSystem,
) -> f64 {
    let w = path.window;
    let mut total = Complex64::new(0.0, 0.0);
    let mut pos = x.to_vec();
    let mut cur = w.s;
    for ((&t, z), &atom) in path.times.iter().zip(&path.jumps).zip(&path.atoms) {
        total += abs_field.abs_compensator(cur, t, &pos);
        let after = shifted(&pos, z);
        total += (abs_field.value(t, &after) + abs_field.value(t, &pos)) * system.phi[atom].norm();
        pos = after;
        cur = t;
    }
    total += abs_field.abs_compensator(cur, w.u, &pos);
    total.re
}

// ---------------------------------------------------------------------------
// Lévy system

/// Bounded test functionals `F(v, y, w)` of time, pre-jump and post-jump
/// lattice positions.
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    Constant(f64),
    /// `1{w − y = offset}`
    JumpIndicator(Vec<i64>),
    /// `(w − y)_axis` in physical units.
    JumpCoordinate(usize),
    /// `e^{−rate·(v − s)} 1{w − y = offset}`
    TimeWeightedJump {
        offset: Vec<i64>,
        rate: f64,
    },
    /// `cos(ω·y)` of the pre-jump position.
    PreJumpCosine(Vec<f64>),
    /// `cos(ω·w)` of the post-jump position.
    PostJumpCosine(Vec<f64>),
    /// `y_axis`: unbounded, rejected.
    PositionCoordinate(usize),
}

impl Functional {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let check_len = |n: usize| {
            if n == dim {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    found: n,
                })
            }
        };
        match self {
            Functional::Constant(c) if !c.is_finite() => Err(invalid("constant functional must be finite")),
            Functional::Constant(_) => Ok(()),
            Functional::JumpIndicator(o) => check_len(o.len()),
            Functional::TimeWeightedJump { offset, rate } => {
                if !(rate.is_finite() && *rate >= 0.0) {
                    return Err(invalid("time weight rate must be finite and nonnegative"));
                }
                check_len(offset.len())
            }
            Functional::JumpCoordinate(axis) => {
                if *axis < dim {
                    Ok(())
                } else {
                    Err(invalid(format!("axis {axis} out of range")))
                }
            }
            Functional::PreJumpCosine(w) | Functional::PostJumpCosine(w) => check_len(w.len()),
            Functional::PositionCoordinate(_) => Err(invalid(
                "position coordinate functional is unbounded; the Lévy system check needs bounded functionals",
            )),
        }
    }

    pub fn eval(&self, v: f64, s: f64, y: &[i64], w: &[i64], step: f64) -> f64 {
        let jump_is = |o: &[i64]| w.iter().zip(y).zip(o).all(|((a, b), c)| a - b == *c);
        let dot = |omega: &[f64], p: &[i64]| -> f64 {
            omega.iter().zip(p).map(|(o, &q)| o * q as f64 * step).sum()
        };
        match self {
            Functional::Constant(c) => *c,
            Functional::JumpIndicator(o) => f64::from(u8::from(jump_is(o))),
            Functional::JumpCoordinate(axis) => (w[*axis] - y[*axis]) as f64 * step,
            Functional::TimeWeightedJump { offset, rate } => {
                if jump_is(offset) {
                    (-rate * (v - s)).exp()
                } else {
                    0.0
                }
            }
            Functional::PreJumpCosine(omega) => dot(omega, y).cos(),
            Functional::PostJumpCosine(omega) => dot(omega, w).cos(),
            Functional::PositionCoordinate(axis) => y[*axis] as f64 * step,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Functional::Constant(c) => format!("constant({c})"),
            Functional::JumpIndicator(o) => format!("jump_indicator({o:?})"),
            Functional::JumpCoordinate(a) => format!("jump_coordinate({a})"),
            Functional::TimeWeightedJump { offset, rate } => {
                format!("time_weighted_jump({offset:?}, rate={rate})")
            }
            Functional::PreJumpCosine(w) => format!("pre_jump_cosine({w:?})"),
            Functional::PostJumpCosine(w) => format!("post_jump_cosine({w:?})"),
            Functional::PositionCoordinate(a) => format!("position_coordinate({a})"),
        }
    }
}

/// The functionals exercised by the shipped Lévy-system checks.
pub fn shipped_functionals(system: &JumpSystem) -> Vec<Functional> {
    let d = system.dim();
    let first = system.jumps.offsets[0].clone();
    let mut omega = vec![0.0; d];
    omega[0] = 0.7 / system.step();
    let mut omega2 = vec![0.3 / system.step(); d];
    omega2[0] = 1.1 / system.step();
    vec![
        Functional::Constant(1.0),
        Functional::JumpIndicator(first.clone()),
        Functional::JumpCoordinate(0),
        Functional::TimeWeightedJump {
            offset: first,
            rate: 1.5,
        },
        Functional::PreJumpCosine(omega),
        Functional::PostJumpCosine(omega2),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevySystemReport {
    pub functional: String,
    pub lhs: Estimate,
    pub rhs: f64,
    /// Bound on the right side's error from truncating `p_t`.
    pub rhs_truncation: f64,
}

impl LevySystemReport {
    pub fn passed(&self, k: f64) -> bool {
        (self.lhs.mean - self.rhs).abs() <= k * self.lhs.stderr + self.rhs_truncation
    }
}

/// Right side of the Lévy system identity,
/// `∫_s^t Σ_y p_{v−s}(y) Σ_z F(v, y, y + z) ν(z) dv`, with `p_{v−s}` from the
/// truncated series and Gauss–Legendre in `v` refined until stable.
pub fn levy_system_rhs(
    system: &JumpSystem,
    functional: &Functional,
    window: Window,
    tol: f64,
) -> Result<(f64, f64)> {
    functional.validate(system.dim())?;
    let jumps = &system.jumps;
    let (pmf, _) = poisson_truncation(jumps.total_mass * window.length(), tol);
    let powers = jumps.convolution_powers(pmf.len() - 1);
    let eval_at = |v: f64| -> f64 {
        let p = TransitionMeasure::from_powers(jumps, &powers, v - window.s, tol);
        p.atoms()
            .map(|(y, py)| {
                py * jumps
                    .offsets
                    .iter()
                    .zip(&jumps.weights)
                    .map(|(z, w)| w * functional.eval(v, window.s, y, &shifted(y, z), jumps.step))
                    .sum::<f64>()
            })
            .sum()
    };
    let rule = |n: usize| -> f64 {
        gauss_legendre_on(n, window.s, window.u)
            .into_iter()
            .map(|(v, w)| w * eval_at(v))
            .sum()
    };
    let mut n = 8;
    let mut prev = rule(n);
    for _ in 0..6 {
        n *= 2;
        let next = rule(n);
        if (next - prev).abs() <= 1e-10 * (1.0 + next.abs()) {
            let bound =
                functional_bound(functional, jumps) * jumps.total_mass * window.length() * tol;
            return Ok((next, bound));
        }
        prev = next;
    }
    Err(Error::ConvergenceFailure {
        estimate: prev,
        error: f64::NAN,
        tol: 1e-10,
    })
}

fn functional_bound(functional: &Functional, jumps: &LatticeJumps) -> f64 {
    match functional {
        Functional::Constant(c) => c.abs(),
        Functional::JumpCoordinate(a) => jumps
            .offsets
            .iter()
            .map(|z| (z[*a] as f64 * jumps.step).abs())
            .fold(0.0, f64::max),
        _ => 1.0,
    }
}

/// Both sides of `E Σ_{s<S_i≤t} F(S_i, X_{s,S_i−}, X_{s,S_i}) =
/// E ∫_s^t ∫ F(v, X_{s,v−}, X_{s,v−} + z) ν(dz) dv`.
pub fn levy_system_check(
    system: &JumpSystem,
    functional: &Functional,
    window: Window,
    n_paths: usize,
    seed: u64,
) -> Result<LevySystemReport> {
    functional.validate(system.dim())?;
    let (rhs, rhs_truncation) = levy_system_rhs(system, functional, window, 1e-12)?;
    let step = system.step();
    let samples = run_ensemble(n_paths, seed, 0, |rng| {
        let path = sample_path(&system.jumps, window, rng)?;
        let mut pos = vec![0i64; system.dim()];
        let mut acc = 0.0;
        for (&t, z) in path.times.iter().zip(&path.jumps) {
            let after = shifted(&pos, z);
            acc += functional.eval(t, window.s, &pos, &after, step);
            pos = after;
        }
        Ok(acc)
    })?;
    Ok(LevySystemReport {
        functional: functional.label(),
        lhs: Estimate::from_samples(&samples),
        rhs,
        rhs_truncation,
    })
}

// ---------------------------------------------------------------------------
// Scenarios and ensemble checks

/// A simulation setup: measure, modulator, boundary function, base point and
/// window.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub system: JumpSystem,
    pub f: GridFunction,
    pub x: Vec<i64>,
    pub window: Window,
}

impl Scenario {
    pub fn field(&self) -> Result<ParabolicField> {
        ParabolicField::new(&self.system, &self.f, self.window.u)
    }

    pub fn abs_field(&self) -> Result<ParabolicField> {
        let abs = self.f.map(|z| Complex64::new(z.norm(), 0.0));
        ParabolicField::new(&self.system, &abs, self.window.u)
    }

    pub fn simulate(
        &self,
        n_paths: usize,
        seed: u64,
        checkpoints: &[f64],
        rule: CompensatorRule,
    ) -> Result<Vec<MartingalePair>> {
        let field = self.field()?;
        run_ensemble(n_paths, seed, 0, |rng| {
            let path = sample_path(&self.system.jumps, self.window, rng)?;
            evolve_martingales(&path, &self.x, &field, &self.system, checkpoints, rule)
        })
    }
}

fn lattice_bump(dims: &[usize], step: f64, width: f64, center: &[f64]) -> Result<GridFunction> {
    let period: Vec<f64> = dims.iter().map(|&n| n as f64 * step).collect();
    GridFunction::from_real(dims.to_vec(), period.clone(), |x| {
        let r2: f64 = x
            .iter()
            .zip(center)
            .zip(&period)
            .map(|((x, c), l)| {
                let d = (x - c + 0.5 * l).rem_euclid(*l) - 0.5 * l;
                d * d
            })
            .sum();
        (-r2 / (2.0 * width * width)).exp()
    })
}

/// Atoms at `±1` (weight 1) and `±2` (weight ½) on the unit lattice with
/// `φ = +1` on the short jumps and `−1` on the long ones.
pub fn sign_pattern_line() -> Result<JumpSystem> {
    let atoms = vec![
        Atom::new(vec![1.0], 1.0),
        Atom::new(vec![-1.0], 1.0),
        Atom::new(vec![2.0], 0.5),
        Atom::new(vec![-2.0], 0.5),
    ];
    JumpSystem::new(
        DiscreteLevyMeasure::new(1, atoms)?,
        JumpModulator::SignPattern(vec![1.0, 1.0, -1.0, -1.0]),
        1.0,
    )
}

/// The scenarios used by the ensemble checks.
pub fn shipped_scenarios() -> Result<Vec<Scenario>> {
    let window = Window::new(0.0, 1.0)?;
    let line = sign_pattern_line()?;
    let plane = DiscreteLevyMeasure::nearest_neighbour(2, 1.0, 1.0)?;
    let diag = DiscreteLevyMeasure::new(
        2,
        vec![
            Atom::new(vec![1.0, 0.0], 1.0),
            Atom::new(vec![-1.0, 0.0], 1.0),
            Atom::new(vec![0.0, 1.0], 1.0),
            Atom::new(vec![0.0, -1.0], 1.0),
            Atom::new(vec![1.0, 1.0], 0.5),
            Atom::new(vec![-1.0, -1.0], 0.5),
        ],
    )?;
    Ok(vec![
        Scenario {
            name: "line-sign-pattern".into(),
            f: lattice_bump(&[32], 1.0, 2.0, &[1.0])?,
            system: line,
            x: vec![0],
            window,
        },
        Scenario {
            name: "plane-axis-indicator".into(),
            f: lattice_bump(&[16, 16], 1.0, 1.5, &[1.0, 0.0])?,
            system: JumpSystem::new(plane.clone(), JumpModulator::AxisIndicator(0), 1.0)?,
            x: vec![0, 0],
            window,
        },
        Scenario {
            name: "plane-diagonal-signs".into(),
            f: lattice_bump(&[16, 16], 1.0, 1.5, &[0.0, 1.0])?,
            system: JumpSystem::new(
                diag,
                JumpModulator::SignPattern(vec![1.0, 1.0, -1.0, -1.0, 1.0, 1.0]),
                1.0,
            )?,
            x: vec![0, 0],
            window,
        },
        Scenario {
            name: "plane-complex-constant".into(),
            f: lattice_bump(&[16, 16], 1.0, 1.5, &[0.0, 0.0])?,
            system: JumpSystem::new(
                plane,
                JumpModulator::Constant(Complex64::new(0.6, 0.3)),
                1.0,
            )?,
            x: vec![0, 0],
            window,
        },
    ])
}

/// `P_{s,u}f(x)` by direct convolution with the periodized truncated `p_{u−s}`.
pub fn parabolic_value_direct(
    system: &JumpSystem,
    f: &GridFunction,
    tau: f64,
    x: &[i64],
    tol: f64,
) -> Result<Complex64> {
    let p = transition_measure(&system.measure, system.step(), tau, tol)?;
    let weights = p.periodize(f.dims());
    let dims = f.dims();
    let mut acc = Complex64::new(0.0, 0.0);
    for (flat, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let y = unsigned_mode(flat, dims);
        let mut idx = 0usize;
        for a in 0..dims.len() {
            let n = dims[a] as i64;
            idx = idx * dims[a] + (x[a] + y[a] as i64).rem_euclid(n) as usize;
        }
        acc += f.samples()[idx] * *w;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleReport {
    /// `E[F_{t₂} − F_{t₁}]`
    pub drift_f: Estimate,
    /// `E[G_{t₂} − G_{t₁}]`
    pub drift_g: Estimate,
    /// `E G_t` at each checkpoint.
    pub mean_g: Vec<(f64, Estimate)>,
    /// `P_{s,u}f(x)` by direct convolution.
    pub oracle: f64,
}

impl MartingaleReport {
    pub fn passed(&self, k: f64) -> bool {
        self.drift_f.within(0.0, k)
            && self.drift_g.within(0.0, k)
            && self.mean_g.iter().all(|(_, e)| e.within(self.oracle, k))
    }
}

/// Drift of `F` and `G` between two checkpoints and the tower property
/// `E G_t = P_{s,u}f(x)`, on the real parts.
pub fn martingale_property_check(
    scenario: &Scenario,
    pairs: &[MartingalePair],
    tol: f64,
) -> Result<MartingaleReport> {
    let first = pairs.first().ok_or_else(|| invalid("empty ensemble"))?;
    if first.checkpoints.len() < 2 {
        return Err(invalid("need at least two checkpoints"));
    }
    let (i1, i2) = (0, first.checkpoints.len() - 1);
    let df: Vec<f64> = pairs
        .iter()
        .map(|p| (p.checkpoints[i2].f - p.checkpoints[i1].f).re)
        .collect();
    let dg: Vec<f64> = pairs
        .iter()
        .map(|p| (p.checkpoints[i2].g - p.checkpoints[i1].g).re)
        .collect();
    let mean_g = (0..first.checkpoints.len())
        .map(|c| {
            let g: Vec<f64> = pairs.iter().map(|p| p.checkpoints[c].g.re).collect();
            (first.checkpoints[c].t, Estimate::from_samples(&g))
        })
        .collect();
    let oracle = parabolic_value_direct(
        &scenario.system,
        &scenario.f,
        scenario.window.length(),
        &scenario.x,
        tol,
    )?
    .re;
    Ok(MartingaleReport {
        drift_f: Estimate::from_samples(&df),
        drift_g: Estimate::from_samples(&dg),
        mean_g,
        oracle,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BurkholderRow {
    pub p: f64,
    /// `E|F_u|^p`
    pub lhs: Estimate,
    /// `(p* − 1)^p E|G_u|^p`
    pub rhs: Estimate,
    /// `E[(p* − 1)^p|G_u|^p − |F_u|^p]`, paired per path.
    pub margin: Estimate,
}

impl BurkholderRow {
    /// Fails only if the margin is negative beyond `k` standard errors plus a
    /// relative rounding allowance (the bound is an equality at p = 2 when F = G).
    pub fn violated(&self, k: f64) -> bool {
        self.margin.mean < -k * self.margin.stderr - 1e-12 * self.rhs.mean.abs()
    }
}

pub fn burkholder_bound_check(
    pairs: &[MartingalePair],
    p_list: &[f64],
) -> Result<Vec<BurkholderRow>> {
    if pairs.is_empty() {
        return Err(invalid("empty ensemble"));
    }
    p_list
        .iter()
        .map(|&p| {
            let c = PStar::new(p)?.bound().powf(p);
            let lhs: Vec<f64> = pairs.iter().map(|m| m.f_final.norm().powf(p)).collect();
            let rhs: Vec<f64> = pairs.iter().map(|m| c * m.g_final.norm().powf(p)).collect();
            let margin: Vec<f64> = rhs.iter().zip(&lhs).map(|(r, l)| r - l).collect();
            Ok(BurkholderRow {
                p,
                lhs: Estimate::from_samples(&lhs),
                rhs: Estimate::from_samples(&rhs),
                margin: Estimate::from_samples(&margin),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub h_mc: Vec<Complex64>,
    pub stderr: Vec<f64>,
    pub h_spec: Vec<Complex64>,
    /// `‖h_mc − h_spec‖_ℓ²`
    pub l2_error: f64,
    /// `‖stderr‖_ℓ²`
    pub stderr_norm: f64,
    pub n_paths: usize,
}

impl ProjectionReport {
    pub fn passed(&self, k: f64) -> bool {
        self.l2_error <= k * self.stderr_norm
    }

    /// `(|ĥ_mc(k) − ĥ_spec(k)|)` per Fourier mode.
    pub fn mode_errors(&self, dims: &[usize], period: &[f64]) -> Result<Vec<f64>> {
        let diff: Vec<Complex64> = self
            .h_mc
            .iter()
            .zip(&self.h_spec)
            .map(|(a, b)| a - b)
            .collect();
        Ok(GridFunction::new(dims.to_vec(), period.to_vec(), diff)?
            .forward()
            .iter()
            .map(|z| z.norm())
            .collect())
    }
}

/// Per-path lattice function `y ↦ F_0(y − X_{s,0})` on the window `(s, 0]`.
fn projected_path_values(
    path: &PoissonPath,
    field: &ParabolicField,
    system: &JumpSystem,
) -> Vec<Complex64> {
    let u = path.window.u;
    let end = path.position_at(u);
    let rel = |p: &[i64]| -> Vec<i64> { p.iter().zip(&end).map(|(a, b)| a - b).collect() };
    let n = field.coeffs.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut pos = vec![0i64; system.dim()];
    let mut cur = path.window.s;
    let add_interval = |a: f64, b: f64, p: &[i64], c: &mut [Complex64]| {
        let r = rel(p);
        for (k, ck) in c.iter_mut().enumerate() {
            let psi = field.psi[k];
            *ck -= field.phase(k, &r) * field.phi_exponent[k] * mode_time_integral(psi, u, a, b);
        }
    };
    for ((&t, z), &atom) in path.times.iter().zip(&path.jumps).zip(&path.atoms) {
        add_interval(cur, t, &pos, &mut c);
        let after = shifted(&pos, z);
        let (r0, r1) = (rel(&pos), rel(&after));
        let phi = system.phi[atom];
        for (k, ck) in c.iter_mut().enumerate() {
            let decay = ((u - t) * field.psi[k]).exp();
            *ck += phi * decay * (field.phase(k, &r1) - field.phase(k, &r0));
        }
        pos = after;
        cur = t;
    }
    add_interval(cur, u, &pos, &mut c);
    // y ↦ Σ_k coeffs_k c_k e^{iθ_k·y}
    let spectrum: Vec<Complex64> = field
        .coeffs
        .iter()
        .zip(&c)
        .map(|(a, b)| a * b * n as f64)
        .collect();
    let mut data = spectrum;
    crate::transform::fft_nd(&mut data, &field.dims, true);
    data.iter().map(|z| z / n as f64).collect()
}

fn projection_inputs(
    system: &JumpSystem,
    f: &GridFunction,
    s: f64,
) -> Result<(ParabolicField, Window)> {
    if !(s < 0.0 && s.is_finite()) {
        return Err(invalid(format!("projection window needs s < 0, got {s}")));
    }
    if s.abs() * system.total_mass() > MAX_WINDOW_MASS {
        return Err(invalid(format!(
            "window too long: |s|·|ν| = {} exceeds {MAX_WINDOW_MASS}",
            s.abs() * system.total_mass()
        )));
    }
    let window = Window::new(s, 0.0)?;
    Ok((ParabolicField::new(system, f, 0.0)?, window))
}

/// Monte Carlo `h(y) = E F_0(y − X_{s,0})`, the function represented by the
/// pairing `g ↦ Σ_x E F_0(x) g(x + X_{s,0})` against lattice indicators,
/// compared with `F⁻¹[m_s f̂]`.
pub fn projection_identity_check(
    system: &JumpSystem,
    f: &GridFunction,
    s: f64,
    n_paths: usize,
    seed: u64,
) -> Result<ProjectionReport> {
    projection_with_offset(system, f, s, n_paths, seed, 0)
}

fn projection_with_offset(
    system: &JumpSystem,
    f: &GridFunction,
    s: f64,
    n_paths: usize,
    seed: u64,
    stream_offset: u64,
) -> Result<ProjectionReport> {
    let (field, window) = projection_inputs(system, f, s)?;
    let (h_mc, stderr) = vector_moments(n_paths, seed, stream_offset, f.len(), |rng| {
        let path = sample_path(&system.jumps, window, rng)?;
        Ok(projected_path_values(&path, &field, system))
    })?;
    let h_spec = apply_multiplier(f, &system.finite_time_symbol(s)?)?
        .samples()
        .to_vec();
    let l2_error = h_mc
        .iter()
        .zip(&h_spec)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let stderr_norm = stderr.iter().map(|e| e * e).sum::<f64>().sqrt();
    Ok(ProjectionReport {
        h_mc,
        stderr,
        h_spec,
        l2_error,
        stderr_norm,
        n_paths,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// `(n_paths, root-mean-square ℓ² error over replicates)`
    pub rows: Vec<(usize, f64)>,
    /// Least-squares slope of `log error` against `log n`.
    pub slope: f64,
}

/// Projection error over independent replicates at each path count.
pub fn projection_convergence(
    system: &JumpSystem,
    f: &GridFunction,
    s: f64,
    n_list: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    if n_list.len() < 2 || replicates == 0 {
        return Err(invalid("need at least two path counts and one replicate"));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for (j, &n) in n_list.iter().enumerate() {
        let mut sq = 0.0;
        for r in 0..replicates {
            let block = ((j * replicates + r) as u64 + 1) << 40;
            sq += projection_with_offset(system, f, s, n, seed, block)?
                .l2_error
                .powi(2);
        }
        rows.push((n, (sq / replicates as f64).sqrt()));
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|&(n, e)| ((n as f64).ln(), e.ln()))
        .collect();
    Ok(ConvergenceReport {
        slope: least_squares_slope(&pts),
        rows,
    })
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Report {
    pub mc: Estimate,
    /// `4(t − s) ‖f‖₁ Σ_z |φ(z)|ν(z)`, equal to `4(t − s)|ν|‖f‖₁` when `|φ| ≡ 1`.
    pub closed_form: f64,
}

impl L1Report {
    pub fn passed(&self, k: f64) -> bool {
        self.mc.within(self.closed_form, k)
    }
}

/// `Σ_x h^d E|F|_u(x)` estimated with a uniformly drawn base point per path.
pub fn l1_mass_check(scenario: &Scenario, n_paths: usize, seed: u64) -> Result<L1Report> {
    let abs_field = scenario.abs_field()?;
    let system = &scenario.system;
    let dims = scenario.f.dims().to_vec();
    let volume: f64 = scenario.f.period().iter().product();
    let samples = run_ensemble(n_paths, seed, 0, |rng| {
        let x: Vec<i64> = dims
            .iter()
            .map(|&n| rng.random_range(0..n as i64))
            .collect();
        let path = sample_path(&system.jumps, scenario.window, rng)?;
        Ok(volume * evolve_abs_process(&path, &x, &abs_field, system))
    })?;
    let l1: f64 =
        scenario.f.samples().iter().map(|z| z.norm()).sum::<f64>() * scenario.f.cell_volume();
    Ok(L1Report {
        mc: Estimate::from_samples(&samples),
        closed_form: 4.0 * scenario.window.length() * l1 * system.modulated_mass(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsReport {
    pub statistic: f64,
    pub n: usize,
    /// 1% critical value `1.628/√n`.
    pub critical: f64,
}

impl KsReport {
    pub fn passed(&self) -> bool {
        self.statistic <= self.critical
    }
}

/// Kolmogorov–Smirnov distance of pooled normalized jump times from U(0, 1);
/// given the jump count the times are i.i.d. uniform on the window.
pub fn jump_time_uniformity(paths: &[PoissonPath]) -> Result<KsReport> {
    let mut xs: Vec<f64> = paths
        .iter()
        .flat_map(|p| {
            p.times
                .iter()
                .map(move |t| (t - p.window.s) / p.window.length())
        })
        .collect();
    if xs.is_empty() {
        return Err(invalid("no jumps to test"));
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max);
    Ok(KsReport {
        statistic: d,
        n: xs.len(),
        critical: 1.628 / n.sqrt(),
    })
}
