//! Periodic grid functions, spectral application of multiplier symbols,
//! Riemann-sum `L^p` norms and empirical norm-ratio sweeps.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};
use crate::symbol::{MultiplierSymbol, SymbolKind};

/// Relative slack allowed above `p* − 1` before a sweep flags a violation.
pub const RATIO_SLACK: f64 = 5e-3;

pub const DEFAULT_N_1D: usize = 4096;
pub const DEFAULT_N_2D: usize = 256;
pub const DEFAULT_PERIOD: f64 = 2.0 * PI;

const MAGIC: &[u8; 4] = b"LMGF";
const FORMAT_VERSION: u32 = 1;

/// Complex samples on the periodic grid `Π_i [0, L_i)` with `N_i` points
/// per axis, stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dims: Vec<usize>,
    period: Vec<f64>,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(dims: Vec<usize>, period: Vec<f64>, samples: Vec<Complex64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 2 {
            return Err(invalid(format!(
                "grids must be 1- or 2-dimensional, got {}",
                dims.len()
            )));
        }
        if period.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                expected: dims.len(),
                found: period.len(),
            });
        }
        for &n in &dims {
            if n < 8 || !n.is_power_of_two() {
                return Err(invalid(format!(
                    "grid size {n} must be a power of two >= 8"
                )));
            }
        }
        if !period.iter().all(|l| l.is_finite() && *l > 0.0) {
            return Err(invalid("periods must be positive and finite"));
        }
        let total: usize = dims.iter().product();
        if samples.len() != total {
            return Err(invalid(format!(
                "expected {total} samples, got {}",
                samples.len()
            )));
        }
        if !samples.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(invalid("samples must be finite"));
        }
        Ok(Self {
            dims,
            period,
            samples,
        })
    }

    pub fn zeros(dims: Vec<usize>, period: Vec<f64>) -> Result<Self> {
        let total = dims.iter().product();
        Self::new(dims, period, vec![Complex64::new(0.0, 0.0); total])
    }

    /// Samples `f` at the grid points `x_i = i·L/N`.
    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(
        dims: Vec<usize>,
        period: Vec<f64>,
        f: F,
    ) -> Result<Self> {
        let total: usize = dims.iter().product();
        let mut samples = Vec::with_capacity(total);
        let mut x = vec![0.0; dims.len()];
        for flat in 0..total {
            let mut rem = flat;
            for axis in (0..dims.len()).rev() {
                let i = rem % dims[axis];
                rem /= dims[axis];
                x[axis] = i as f64 * period[axis] / dims[axis] as f64;
            }
            samples.push(f(&x));
        }
        Self::new(dims, period, samples)
    }

    pub fn from_real<F: Fn(&[f64]) -> f64>(
        dims: Vec<usize>,
        period: Vec<f64>,
        f: F,
    ) -> Result<Self> {
        Self::from_fn(dims, period, |x| Complex64::new(f(x), 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
    pub fn period(&self) -> &[f64] {
        &self.period
    }
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.dims
            .iter()
            .zip(&self.period)
            .map(|(&n, l)| l / n as f64)
            .product()
    }

    /// Grid coordinates of the flat index.
    pub fn index_to_multi(&self, flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        let mut rem = flat;
        for axis in (0..self.dims.len()).rev() {
            out[axis] = rem % self.dims[axis];
            rem /= self.dims[axis];
        }
        out
    }

    /// Angular frequency `2π k̃ / L` of the flat index, with `k̃` the signed
    /// alias in `[−N/2, N/2)`.
    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        self.index_to_multi(flat)
            .into_iter()
            .enumerate()
            .map(|(axis, k)| frequency_of(k, self.dims[axis], self.period[axis]))
            .collect()
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self {
            dims: self.dims.clone(),
            period: self.period.clone(),
            samples: self.samples.iter().map(|&z| f(z)).collect(),
        }
    }

    fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.dims != other.dims || self.period != other.period {
            return Err(invalid("grid functions live on different grids"));
        }
        Ok(())
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            dims: self.dims.clone(),
            period: self.period.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            dims: self.dims.clone(),
            period: self.period.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.samples.len() as f64
    }

    pub fn without_mean(&self) -> Self {
        let m = self.mean();
        self.map(|z| z - m)
    }

    /// Plain `ℓ²` norm of the sample vector.
    pub fn l2_samples(&self) -> f64 {
        self.samples
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest `|Im f| / ‖f‖_ℓ²`.
    pub fn imaginary_fraction(&self) -> f64 {
        let n = self.l2_samples();
        if n == 0.0 {
            return 0.0;
        }
        self.samples.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / n
    }

    /// `Σ f_i g_i · h^d`, the discrete pairing `∫ f g`.
    pub fn pairing(&self, other: &GridFunction) -> Result<Complex64> {
        self.check_same_grid(other)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .sum::<Complex64>()
            * self.cell_volume())
    }

    /// Unnormalized forward DFT, `X_k = Σ_n x_n e^{−2πi k·n/N}`.
    pub fn forward(&self) -> Vec<Complex64> {
        let mut data = self.samples.clone();
        fft_nd(&mut data, &self.dims, false);
        data
    }

    /// Inverse of [`forward`](Self::forward), including the `1/N` factor.
    pub fn from_spectrum(
        dims: Vec<usize>,
        period: Vec<f64>,
        mut spectrum: Vec<Complex64>,
    ) -> Result<Self> {
        fft_nd(&mut spectrum, &dims, true);
        let scale = 1.0 / spectrum.len() as f64;
        spectrum.iter_mut().for_each(|z| *z *= scale);
        Self::new(dims, period, spectrum)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.dims.len() as u32).to_le_bytes())?;
        for &n in &self.dims {
            w.write_all(&(n as u32).to_le_bytes())?;
        }
        for &l in &self.period {
            w.write_all(&l.to_le_bytes())?;
        }
        for z in &self.samples {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not an LMGF grid file".into()));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported LMGF version {version}")));
        }
        let d = read_u32(&mut r)? as usize;
        if !(1..=2).contains(&d) {
            return Err(Error::Format(format!("unsupported grid dimension {d}")));
        }
        let dims = (0..d)
            .map(|_| read_u32(&mut r).map(|n| n as usize))
            .collect::<Result<Vec<_>>>()?;
        let period = (0..d)
            .map(|_| read_f64(&mut r))
            .collect::<Result<Vec<_>>>()?;
        let total: usize = dims.iter().product();
        let mut samples = Vec::with_capacity(total);
        for _ in 0..total {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            samples.push(Complex64::new(re, im));
        }
        Self::new(dims, period, samples)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let coords: Vec<String> = (1..=self.dim()).map(|i| format!("x_{i}")).collect();
        writeln!(w, "{},re,im", coords.join(","))?;
        for (flat, z) in self.samples.iter().enumerate() {
            let idx = self.index_to_multi(flat);
            let xs: Vec<String> = idx
                .iter()
                .enumerate()
                .map(|(a, &i)| format!("{}", i as f64 * self.period[a] / self.dims[a] as f64))
                .collect();
            writeln!(w, "{},{},{}", xs.join(","), z.re, z.im)?;
        }
        Ok(())
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub(crate) fn frequency_of(k: usize, n: usize, period: f64) -> f64 {
    let signed = if k >= n / 2 {
        k as i64 - n as i64
    } else {
        k as i64
    };
    2.0 * PI * signed as f64 / period
}

/// In-place multidimensional FFT over a row-major array (unnormalized).
pub(crate) fn fft_nd(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let plan = |n: usize, planner: &mut FftPlanner<f64>| -> Arc<dyn Fft<f64>> {
        if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        }
    };
    match dims {
        [n] => plan(*n, &mut planner).process(data),
        [rows, cols] => {
            let (rows, cols) = (*rows, *cols);
            plan(cols, &mut planner).process(data);
            let col_fft = plan(rows, &mut planner);
            let mut column = vec![Complex64::new(0.0, 0.0); rows];
            for c in 0..cols {
                for r in 0..rows {
                    column[r] = data[r * cols + c];
                }
                col_fft.process(&mut column);
                for r in 0..rows {
                    data[r * cols + c] = column[r];
                }
            }
        }
        _ => unreachable!("grid dimension validated at construction"),
    }
}

/// Symbol values at every frequency of a grid, in DFT order.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    dims: Vec<usize>,
    period: Vec<f64>,
    values: Vec<Complex64>,
}

impl SymbolTable {
    pub fn new(symbol: &MultiplierSymbol, dims: &[usize], period: &[f64]) -> Result<Self> {
        if let Some(d) = symbol.dim() {
            if d != dims.len() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: dims.len(),
                });
            }
        }
        let probe = GridFunction::zeros(dims.to_vec(), period.to_vec())?;
        let values = (0..probe.len())
            .into_par_iter()
            .map(|flat| symbol.eval(&probe.frequency(flat)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dims: dims.to_vec(),
            period: period.to_vec(),
            values,
        })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.dims() != self.dims.as_slice() || f.period() != self.period.as_slice() {
            return Err(invalid(
                "symbol table and grid function use different grids",
            ));
        }
        let mut spec = f.forward();
        spec.iter_mut().zip(&self.values).for_each(|(z, m)| *z *= m);
        GridFunction::from_spectrum(self.dims.clone(), self.period.clone(), spec)
    }

    /// Rows `(ξ, M(ξ))` in DFT order.
    pub fn rows(&self) -> Result<Vec<(Vec<f64>, Complex64)>> {
        let probe = GridFunction::zeros(self.dims.clone(), self.period.clone())?;
        Ok(self
            .values
            .iter()
            .enumerate()
            .map(|(flat, v)| (probe.frequency(flat), *v))
            .collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let cols: Vec<String> = (1..=self.dims.len()).map(|i| format!("xi_{i}")).collect();
        writeln!(w, "{},re,im", cols.join(","))?;
        for (xi, v) in self.rows()? {
            let xs: Vec<String> = xi.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{},{},{}", xs.join(","), v.re, v.im)?;
        }
        Ok(())
    }
}

/// `M f` computed as `F^{-1}[M · F f]`. A constant symbol scales the samples
/// directly, so `M ≡ 1` returns `f` bit for bit.
pub fn apply_multiplier(f: &GridFunction, symbol: &MultiplierSymbol) -> Result<GridFunction> {
    if let SymbolKind::Constant(c) = symbol.kind() {
        return Ok(if *c == Complex64::new(1.0, 0.0) {
            f.clone()
        } else {
            f.scale(*c)
        });
    }
    SymbolTable::new(symbol, f.dims(), f.period())?.apply(f)
}

/// `(Σ |f_i|^p h^d)^{1/p}`; `p = ∞` gives the sup norm.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid(format!("Lp norm needs p >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.samples().iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let s: f64 = f.samples().iter().map(|z| z.norm().powf(p)).sum();
    Ok((s * f.cell_volume()).powf(1.0 / p))
}

/// Exponent `p ∈ (1, ∞)` with its conjugate `q` and `p* = max(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PStar {
    pub p: f64,
    pub q: f64,
    pub p_star: f64,
}

impl PStar {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(invalid(format!("p must lie in (1, ∞), got {p}")));
        }
        let q = p / (p - 1.0);
        Ok(Self {
            p,
            q,
            p_star: p.max(q),
        })
    }

    /// `p* − 1 = max(p − 1, 1/(p − 1))`.
    pub fn bound(&self) -> f64 {
        (self.p - 1.0).max(1.0 / (self.p - 1.0))
    }
}

/// A corpus function with an identifier.
#[derive(Debug, Clone)]
pub struct CorpusMember {
    pub id: String,
    pub f: GridFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub bound: f64,
    pub max_ratio: f64,
    pub argmax_id: String,
    pub violated: bool,
}

/// Largest `‖Mf‖_p / ‖f‖_p` over the corpus for each `p`, against `p* − 1`.
pub fn norm_ratio_sweep(
    symbol: &MultiplierSymbol,
    corpus: &[CorpusMember],
    p_list: &[f64],
) -> Result<Vec<SweepRow>> {
    let first = corpus.first().ok_or_else(|| invalid("corpus is empty"))?;
    let table = SymbolTable::new(symbol, first.f.dims(), first.f.period())?;
    norm_ratio_sweep_with_table(&table, corpus, p_list)
}

pub fn norm_ratio_sweep_with_table(
    table: &SymbolTable,
    corpus: &[CorpusMember],
    p_list: &[f64],
) -> Result<Vec<SweepRow>> {
    if corpus.is_empty() {
        return Err(invalid("corpus is empty"));
    }
    let exps = p_list
        .iter()
        .map(|&p| PStar::new(p))
        .collect::<Result<Vec<_>>>()?;
    // ratios[member][p]
    let ratios = corpus
        .par_iter()
        .map(|m| {
            let out = table.apply(&m.f)?;
            exps.iter()
                .map(|e| {
                    let denom = lp_norm(&m.f, e.p)?;
                    if denom == 0.0 {
                        return Err(invalid(format!("corpus member {} has zero norm", m.id)));
                    }
                    Ok(lp_norm(&out, e.p)? / denom)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(exps
        .iter()
        .enumerate()
        .map(|(j, e)| {
            let (best, ratio) = ratios.iter().enumerate().map(|(i, r)| (i, r[j])).fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
            let bound = e.bound();
            SweepRow {
                p: e.p,
                bound,
                max_ratio: ratio,
                argmax_id: corpus[best].id.clone(),
                violated: ratio > bound * (1.0 + RATIO_SLACK),
            }
        })
        .collect())
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[(String, SweepRow)]) -> Result<()> {
    writeln!(w, "symbol_id,p,p_star_minus_1,max_ratio,argmax_corpus_id")?;
    for (id, r) in rows {
        writeln!(
            w,
            "{id},{},{},{},{}",
            r.p, r.bound, r.max_ratio, r.argmax_id
        )?;
    }
    Ok(())
}

/// Parameters of the deterministic test-function corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub dims: Vec<usize>,
    pub period: Vec<f64>,
    pub count: usize,
    pub seed: u64,
}

impl CorpusConfig {
    pub fn default_2d(count: usize, seed: u64) -> Self {
        Self {
            dims: vec![DEFAULT_N_2D; 2],
            period: vec![DEFAULT_PERIOD; 2],
            count,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    GaussianBump,
    CosineBump,
    BoxIndicator,
    DiskIndicator,
    TrigPolynomial,
    SignProduct,
    SignedTrig,
}

const KINDS: [CorpusKind; 7] = [
    CorpusKind::GaussianBump,
    CorpusKind::CosineBump,
    CorpusKind::BoxIndicator,
    CorpusKind::DiskIndicator,
    CorpusKind::TrigPolynomial,
    CorpusKind::SignProduct,
    CorpusKind::SignedTrig,
];

/// Periodic displacement `x − c` reduced to `[−L/2, L/2)`.
fn wrap(x: f64, c: f64, l: f64) -> f64 {
    (x - c + 0.5 * l).rem_euclid(l) - 0.5 * l
}

fn wrapped_radius2(x: &[f64], center: &[f64], period: &[f64]) -> f64 {
    x.iter()
        .zip(center)
        .zip(period)
        .map(|((x, c), l)| wrap(*x, *c, *l).powi(2))
        .sum()
}

/// `exp(−|x − c|² / (2w²))` with periodic distance.
pub fn gaussian_bump(
    dims: &[usize],
    period: &[f64],
    center: &[f64],
    width: f64,
) -> Result<GridFunction> {
    GridFunction::from_real(dims.to_vec(), period.to_vec(), |x| {
        (-wrapped_radius2(x, center, period) / (2.0 * width * width)).exp()
    })
}

/// `(1 + cos(π r / w)) / 2` for `r < w`, zero outside.
pub fn cosine_bump(
    dims: &[usize],
    period: &[f64],
    center: &[f64],
    width: f64,
) -> Result<GridFunction> {
    GridFunction::from_real(dims.to_vec(), period.to_vec(), |x| {
        let r = wrapped_radius2(x, center, period).sqrt();
        if r < width {
            0.5 * (1.0 + (PI * r / width).cos())
        } else {
            0.0
        }
    })
}

/// Deterministic corpus cycling through bumps, indicators, random
/// trigonometric polynomials and sign patterns.
pub fn build_corpus(config: &CorpusConfig) -> Result<Vec<CorpusMember>> {
    if config.count == 0 {
        return Ok(Vec::new());
    }
    let dims = &config.dims;
    let period = &config.period;
    let d = dims.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::with_capacity(config.count);
    for i in 0..config.count {
        let kind = KINDS[i % KINDS.len()];
        let center: Vec<f64> = period.iter().map(|l| rng.random_range(0.0..*l)).collect();
        let lmin = period.iter().cloned().fold(f64::INFINITY, f64::min);
        let (name, f) = match kind {
            CorpusKind::GaussianBump => {
                let w = lmin * rng.random_range(0.02..0.08);
                ("gauss", gaussian_bump(dims, period, &center, w)?)
            }
            CorpusKind::CosineBump => {
                let w = lmin * rng.random_range(0.05..0.2);
                ("cosbump", cosine_bump(dims, period, &center, w)?)
            }
            CorpusKind::BoxIndicator => {
                let half: Vec<f64> = period
                    .iter()
                    .map(|l| l * rng.random_range(0.05..0.25))
                    .collect();
                let f = GridFunction::from_real(dims.clone(), period.clone(), |x| {
                    let inside = x
                        .iter()
                        .zip(&center)
                        .zip(period)
                        .zip(&half)
                        .all(|(((x, c), l), h)| wrap(*x, *c, *l).abs() < *h);
                    if inside {
                        1.0
                    } else {
                        0.0
                    }
                })?;
                ("box", f)
            }
            CorpusKind::DiskIndicator => {
                let r = lmin * rng.random_range(0.05..0.3);
                let f = GridFunction::from_real(dims.clone(), period.clone(), |x| {
                    if wrapped_radius2(x, &center, period) < r * r {
                        1.0
                    } else {
                        0.0
                    }
                })?;
                ("disk", f)
            }
            CorpusKind::TrigPolynomial | CorpusKind::SignedTrig => {
                let terms = 6;
                let modes: Vec<(Vec<f64>, f64, f64)> = (0..terms)
                    .map(|_| {
                        let k: Vec<f64> = period
                            .iter()
                            .map(|l| 2.0 * PI * rng.random_range(-8i32..=8) as f64 / l)
                            .collect();
                        (
                            k,
                            rng.random_range(-1.0..1.0),
                            rng.random_range(0.0..2.0 * PI),
                        )
                    })
                    .collect();
                let eval = |x: &[f64]| -> f64 {
                    modes
                        .iter()
                        .map(|(k, a, ph)| {
                            a * (k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + ph).cos()
                        })
                        .sum()
                };
                if kind == CorpusKind::TrigPolynomial {
                    (
                        "trig",
                        GridFunction::from_real(dims.clone(), period.clone(), eval)?,
                    )
                } else {
                    let f = GridFunction::from_real(dims.clone(), period.clone(), |x| {
                        if eval(x) >= 0.0 {
                            1.0
                        } else {
                            -1.0
                        }
                    })?;
                    ("signtrig", f)
                }
            }
            CorpusKind::SignProduct => {
                let k: Vec<f64> = period
                    .iter()
                    .map(|l| 2.0 * PI * rng.random_range(1i32..=6) as f64 / l)
                    .collect();
                let ph: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
                let f = GridFunction::from_real(dims.clone(), period.clone(), |x| {
                    x.iter()
                        .zip(&k)
                        .zip(&ph)
                        .map(|((x, k), p)| if (k * x + p).cos() >= 0.0 { 1.0 } else { -1.0 })
                        .product()
                })?;
                ("signprod", f)
            }
        };
        out.push(CorpusMember {
            id: format!("{name}-{i:03}"),
            f,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::SymbolKind;
    use approx::assert_abs_diff_eq;

    fn symbol(kind: SymbolKind) -> MultiplierSymbol {
        MultiplierSymbol::new(kind).unwrap()
    }

    #[test]
    fn frequency_aliasing() {
        let f = GridFunction::zeros(vec![8], vec![2.0 * PI]).unwrap();
        let ks: Vec<f64> = (0..8).map(|i| f.frequency(i)[0]).collect();
        assert_eq!(ks, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }

    #[test]
    fn grid_validation() {
        assert!(GridFunction::zeros(vec![6], vec![1.0]).is_err());
        assert!(GridFunction::zeros(vec![4], vec![1.0]).is_err());
        assert!(GridFunction::zeros(vec![8, 8, 8], vec![1.0; 3]).is_err());
        assert!(
            GridFunction::new(vec![8], vec![1.0], vec![Complex64::new(f64::NAN, 0.0); 8]).is_err()
        );
    }

    #[test]
    fn constant_symbol_is_identity() {
        let f = gaussian_bump(&[64], &[2.0 * PI], &[1.0], 0.3).unwrap();
        let out =
            apply_multiplier(&f, &symbol(SymbolKind::Constant(Complex64::new(1.0, 0.0)))).unwrap();
        let err = out.sub(&f).unwrap().l2_samples() / f.l2_samples();
        assert!(err < 1e-14);
    }

    #[test]
    fn riesz2_negates_a_sine() {
        let l = 2.0 * PI;
        let f =
            GridFunction::from_real(vec![256], vec![l], |x| (2.0 * PI * x[0] / l).sin()).unwrap();
        let out = apply_multiplier(&f, &symbol(SymbolKind::Riesz2 { axis: 0, dim: 1 })).unwrap();
        let err = out.add(&f).unwrap().l2_samples() / f.l2_samples();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn cauchy_power_halves_diagonal_product() {
        // cos x₁ cos x₂ splits into four modes (±1, ±1), each with |ξ₁| = |ξ₂|.
        let l = 2.0 * PI;
        let f =
            GridFunction::from_real(vec![32, 32], vec![l, l], |x| x[0].cos() * x[1].cos()).unwrap();
        let m = symbol(SymbolKind::Power {
            alpha: 1.0,
            axis: 0,
            dim: 2,
        });
        let out = apply_multiplier(&f, &m).unwrap();
        let err = out
            .sub(&f.scale(Complex64::new(0.5, 0.0)))
            .unwrap()
            .l2_samples();
        assert!(err < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let f = GridFunction::zeros(vec![16], vec![1.0]).unwrap();
        let m = symbol(SymbolKind::Riesz2 { axis: 0, dim: 2 });
        assert!(matches!(
            apply_multiplier(&f, &m),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lp_norm_examples() {
        let one = GridFunction::from_real(vec![64], vec![1.0], |_| 1.0).unwrap();
        assert_abs_diff_eq!(lp_norm(&one, 3.0).unwrap(), 1.0, epsilon = 1e-14);
        let half =
            GridFunction::from_real(vec![64], vec![1.0], |x| if x[0] < 0.5 { 1.0 } else { 0.0 })
                .unwrap();
        assert_abs_diff_eq!(lp_norm(&half, 2.0).unwrap(), 0.5f64.sqrt(), epsilon = 1e-14);
        let s = GridFunction::from_real(vec![1024], vec![2.0 * PI], |x| x[0].sin()).unwrap();
        assert_abs_diff_eq!(lp_norm(&s, 2.0).unwrap(), PI.sqrt(), epsilon = 1e-6);
        assert!(lp_norm(&s, 0.5).is_err());
    }

    #[test]
    fn p_star_arithmetic() {
        assert_abs_diff_eq!(PStar::new(4.0).unwrap().bound(), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(PStar::new(4.0 / 3.0).unwrap().bound(), 3.0, epsilon = 1e-14);
        assert_eq!(PStar::new(2.0).unwrap().bound(), 1.0);
        assert!(PStar::new(1.0).is_err());
    }

    #[test]
    fn bump_l1_norms_match_closed_forms() {
        let l = 2.0 * PI;
        let w = 0.2;
        let g = gaussian_bump(&[256, 256], &[l, l], &[3.0, 2.0], w).unwrap();
        let l1 = lp_norm(&g, 1.0).unwrap();
        assert!((l1 / (2.0 * PI * w * w) - 1.0).abs() < 1e-2);
        let c = cosine_bump(&[256, 256], &[l, l], &[1.0, 5.0], 0.5).unwrap();
        let exact = 0.25 * (PI / 2.0 - 2.0 / PI);
        assert!((lp_norm(&c, 1.0).unwrap() / exact - 1.0).abs() < 1e-2);
    }

    #[test]
    fn corpus_is_deterministic() {
        let cfg = CorpusConfig {
            dims: vec![32, 32],
            period: vec![2.0 * PI; 2],
            count: 10,
            seed: 7,
        };
        let a = build_corpus(&cfg).unwrap();
        let b = build_corpus(&cfg).unwrap();
        assert_eq!(a.len(), 10);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.id, y.id);
            assert_eq!(x.f, y.f);
        }
    }

    #[test]
    fn sweep_rejects_bad_inputs() {
        let m = symbol(SymbolKind::Riesz2 { axis: 0, dim: 1 });
        assert!(norm_ratio_sweep(&m, &[], &[2.0]).is_err());
        let zero = CorpusMember {
            id: "z".into(),
            f: GridFunction::zeros(vec![16], vec![1.0]).unwrap(),
        };
        assert!(norm_ratio_sweep(&m, &[zero], &[2.0]).is_err());
    }

    #[test]
    fn binary_format_round_trip() {
        let f = gaussian_bump(&[16, 8], &[1.0, 2.5], &[0.3, 0.2], 0.1)
            .unwrap()
            .map(|z| z * Complex64::new(1.0, -0.5));
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"LMGF");
        assert_eq!(buf.len(), 4 + 4 + 4 + 2 * 4 + 2 * 8 + 16 * 8 * 16);
        let g = GridFunction::read_binary(buf.as_slice()).unwrap();
        assert_eq!(f, g);
        buf[0] = b'X';
        assert!(matches!(
            GridFunction::read_binary(buf.as_slice()),
            Err(Error::Format(_))
        ));
    }
}
