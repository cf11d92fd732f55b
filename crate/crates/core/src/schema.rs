//! JSON documents for measures, modulators, symbols and simulation
//! scenarios. Field names are listed in `docs/schema.md`.
//!
//! Reals may be written as JSON numbers or as decimal strings; both parse to
//! the nearest `f64`, and serialization writes the shortest representation
//! that parses back to the same value.

use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::levy_measure::{
    Atom, DiscreteLevyMeasure, JumpModulator, LevyMeasure, TruncatedStableMeasure,
};
use crate::stochastic::{CompensatorRule, Functional, JumpSystem, Scenario, Window};
use crate::symbol::{MultiplierSymbol, SymbolKind};
use crate::transform::GridFunction;

/// A real read from a number or a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RealVisitor;
        impl Visitor<'_> for RealVisitor {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a decimal string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Real, E> {
                Ok(Real(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Real, E> {
                v.trim()
                    .parse::<f64>()
                    .map(Real)
                    .map_err(|_| E::custom(format!("not a decimal number: {v:?}")))
            }
        }
        d.deserialize_any(RealVisitor)
    }
}

fn reals(v: &[Real]) -> Vec<f64> {
    v.iter().map(|r| r.0).collect()
}

fn to_reals(v: &[f64]) -> Vec<Real> {
    v.iter().copied().map(Real).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub location: Vec<Real>,
    pub weight: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntryDoc {
    pub location: Vec<Real>,
    pub re: Real,
    #[serde(default = "zero")]
    pub im: Real,
}

fn zero() -> Real {
    Real(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModulatorDoc {
    Constant {
        re: Real,
        #[serde(default = "zero")]
        im: Real,
    },
    AxisIndicator {
        axis: usize,
    },
    PerAxis {
        coefficients: Vec<Real>,
    },
    SignPattern {
        signs: Vec<Real>,
    },
    Table {
        entries: Vec<TableEntryDoc>,
    },
}

impl ModulatorDoc {
    pub fn build(&self) -> JumpModulator {
        match self {
            ModulatorDoc::Constant { re, im } => {
                JumpModulator::Constant(Complex64::new(re.0, im.0))
            }
            ModulatorDoc::AxisIndicator { axis } => JumpModulator::AxisIndicator(*axis),
            ModulatorDoc::PerAxis { coefficients } => JumpModulator::PerAxis(reals(coefficients)),
            ModulatorDoc::SignPattern { signs } => JumpModulator::SignPattern(reals(signs)),
            ModulatorDoc::Table { entries } => JumpModulator::Table(
                entries
                    .iter()
                    .map(|e| (reals(&e.location), Complex64::new(e.re.0, e.im.0)))
                    .collect(),
            ),
        }
    }

    pub fn from_modulator(m: &JumpModulator) -> Self {
        match m {
            JumpModulator::Constant(c) => ModulatorDoc::Constant {
                re: Real(c.re),
                im: Real(c.im),
            },
            JumpModulator::AxisIndicator(a) => ModulatorDoc::AxisIndicator { axis: *a },
            JumpModulator::PerAxis(c) => ModulatorDoc::PerAxis {
                coefficients: to_reals(c),
            },
            JumpModulator::SignPattern(s) => ModulatorDoc::SignPattern { signs: to_reals(s) },
            JumpModulator::Table(entries) => ModulatorDoc::Table {
                entries: entries
                    .iter()
                    .map(|(loc, v)| TableEntryDoc {
                        location: to_reals(loc),
                        re: Real(v.re),
                        im: Real(v.im),
                    })
                    .collect(),
            },
        }
    }
}

/// A Lévy measure with the modulator acting on its jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureDoc {
    Discrete {
        dim: usize,
        atoms: Vec<AtomDoc>,
        modulator: ModulatorDoc,
    },
    Stable {
        dim: usize,
        alpha: Real,
        #[serde(default = "zero")]
        epsilon: Real,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        outer_radius: Option<Real>,
        /// Defaults to the coordinate directions `±e_j` with unit weight.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angular_atoms: Option<Vec<AtomDoc>>,
        modulator: ModulatorDoc,
    },
}

fn atoms_of(docs: &[AtomDoc]) -> Vec<Atom> {
    docs.iter()
        .map(|a| Atom::new(reals(&a.location), a.weight.0))
        .collect()
}

fn atom_docs(atoms: &[Atom]) -> Vec<AtomDoc> {
    atoms
        .iter()
        .map(|a| AtomDoc {
            location: to_reals(&a.location),
            weight: Real(a.weight),
        })
        .collect()
}

impl MeasureDoc {
    pub fn build(&self) -> Result<(LevyMeasure, JumpModulator)> {
        match self {
            MeasureDoc::Discrete {
                dim,
                atoms,
                modulator,
            } => Ok((
                LevyMeasure::Discrete(DiscreteLevyMeasure::new(*dim, atoms_of(atoms))?),
                modulator.build(),
            )),
            MeasureDoc::Stable {
                dim,
                alpha,
                epsilon,
                outer_radius,
                angular_atoms,
                modulator,
            } => {
                let outer = outer_radius.map(|r| r.0);
                let m = match angular_atoms {
                    Some(a) => {
                        TruncatedStableMeasure::new(*dim, alpha.0, epsilon.0, outer, atoms_of(a))?
                    }
                    None => TruncatedStableMeasure::axis(*dim, alpha.0, epsilon.0, outer)?,
                };
                Ok((LevyMeasure::Stable(m), modulator.build()))
            }
        }
    }

    pub fn from_parts(measure: &LevyMeasure, modulator: &JumpModulator) -> Self {
        let modulator = ModulatorDoc::from_modulator(modulator);
        match measure {
            LevyMeasure::Discrete(m) => MeasureDoc::Discrete {
                dim: m.dim(),
                atoms: atom_docs(m.atoms()),
                modulator,
            },
            LevyMeasure::Stable(m) => MeasureDoc::Stable {
                dim: m.dim(),
                alpha: Real(m.alpha()),
                epsilon: Real(m.epsilon()),
                outer_radius: m.outer_radius().map(Real),
                angular_atoms: Some(atom_docs(m.angular_atoms())),
                modulator,
            },
        }
    }
}

/// A multiplier symbol. Axes are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolDoc {
    Constant {
        re: Real,
        #[serde(default = "zero")]
        im: Real,
    },
    General {
        measure: MeasureDoc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<Real>,
    },
    FiniteTime {
        measure: MeasureDoc,
        s: Real,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<Real>,
    },
    Power {
        alpha: Real,
        axis: usize,
        dim: usize,
    },
    Riesz2 {
        axis: usize,
        dim: usize,
    },
    RieszPair {
        axes: (usize, usize),
        dim: usize,
    },
    RieszCombo {
        coefficients: Vec<Real>,
    },
    BeurlingAhlfors {},
    FirstOrderRiesz {
        axis: usize,
        dim: usize,
    },
}

impl SymbolDoc {
    pub fn build(&self) -> Result<MultiplierSymbol> {
        let with_tol = |s: MultiplierSymbol, tol: &Option<Real>| match tol {
            Some(t) => s.with_tolerance(t.0),
            None => s,
        };
        match self {
            SymbolDoc::Constant { re, im } => {
                MultiplierSymbol::new(SymbolKind::Constant(Complex64::new(re.0, im.0)))
            }
            SymbolDoc::General { measure, tolerance } => {
                let (measure, modulator) = measure.build()?;
                Ok(with_tol(
                    MultiplierSymbol::new(SymbolKind::General { measure, modulator })?,
                    tolerance,
                ))
            }
            SymbolDoc::FiniteTime {
                measure,
                s,
                tolerance,
            } => {
                let (measure, modulator) = measure.build()?;
                Ok(with_tol(
                    MultiplierSymbol::new(SymbolKind::FiniteTime {
                        measure,
                        modulator,
                        s: s.0,
                    })?,
                    tolerance,
                ))
            }
            SymbolDoc::Power { alpha, axis, dim } => MultiplierSymbol::new(SymbolKind::Power {
                alpha: alpha.0,
                axis: *axis,
                dim: *dim,
            }),
            SymbolDoc::Riesz2 { axis, dim } => MultiplierSymbol::new(SymbolKind::Riesz2 {
                axis: *axis,
                dim: *dim,
            }),
            SymbolDoc::RieszPair { axes, dim } => MultiplierSymbol::new(SymbolKind::RieszPair {
                axes: *axes,
                dim: *dim,
            }),
            SymbolDoc::RieszCombo { coefficients } => {
                MultiplierSymbol::new(SymbolKind::RieszCombo {
                    coefficients: reals(coefficients),
                })
            }
            SymbolDoc::BeurlingAhlfors {} => MultiplierSymbol::new(SymbolKind::BeurlingAhlfors),
            SymbolDoc::FirstOrderRiesz { axis, dim } => {
                MultiplierSymbol::new(SymbolKind::FirstOrderRiesz {
                    axis: *axis,
                    dim: *dim,
                })
            }
        }
    }

    pub fn from_kind(kind: &SymbolKind) -> Self {
        match kind {
            SymbolKind::Constant(c) => SymbolDoc::Constant {
                re: Real(c.re),
                im: Real(c.im),
            },
            SymbolKind::General { measure, modulator } => SymbolDoc::General {
                measure: MeasureDoc::from_parts(measure, modulator),
                tolerance: None,
            },
            SymbolKind::FiniteTime {
                measure,
                modulator,
                s,
            } => SymbolDoc::FiniteTime {
                measure: MeasureDoc::from_parts(measure, modulator),
                s: Real(*s),
                tolerance: None,
            },
            SymbolKind::Power { alpha, axis, dim } => SymbolDoc::Power {
                alpha: Real(*alpha),
                axis: *axis,
                dim: *dim,
            },
            SymbolKind::Riesz2 { axis, dim } => SymbolDoc::Riesz2 {
                axis: *axis,
                dim: *dim,
            },
            SymbolKind::RieszPair { axes, dim } => SymbolDoc::RieszPair {
                axes: *axes,
                dim: *dim,
            },
            SymbolKind::RieszCombo { coefficients } => SymbolDoc::RieszCombo {
                coefficients: to_reals(coefficients),
            },
            SymbolKind::BeurlingAhlfors => SymbolDoc::BeurlingAhlfors {},
            SymbolKind::FirstOrderRiesz { axis, dim } => SymbolDoc::FirstOrderRiesz {
                axis: *axis,
                dim: *dim,
            },
        }
    }
}

/// A sample value: a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleDoc {
    Real(Real),
    Complex([Real; 2]),
}

impl SampleDoc {
    fn value(&self) -> Complex64 {
        match self {
            SampleDoc::Real(r) => Complex64::new(r.0, 0.0),
            SampleDoc::Complex([re, im]) => Complex64::new(re.0, im.0),
        }
    }
}

/// A lattice function given inline (row-major) or by a grid file path,
/// resolved relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionDoc {
    Table {
        dims: Vec<usize>,
        values: Vec<SampleDoc>,
    },
    File {
        file: PathBuf,
    },
}

impl FunctionDoc {
    /// The grid function on the lattice of spacing `step`.
    pub fn build(&self, step: f64, base: Option<&Path>) -> Result<GridFunction> {
        match self {
            FunctionDoc::Table { dims, values } => {
                let period = dims.iter().map(|&n| n as f64 * step).collect();
                GridFunction::new(
                    dims.clone(),
                    period,
                    values.iter().map(SampleDoc::value).collect(),
                )
            }
            FunctionDoc::File { file } => {
                let path = match base {
                    Some(b) if file.is_relative() => b.join(file),
                    _ => file.clone(),
                };
                let mut r = std::io::BufReader::new(std::fs::File::open(&path)?);
                GridFunction::read_binary(&mut r)
            }
        }
    }
}

fn default_step() -> Real {
    Real(1.0)
}

/// One stochastic verification setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub name: String,
    /// Must be `discrete` with lattice atoms.
    pub measure: MeasureDoc,
    #[serde(default = "default_step")]
    pub step: Real,
    pub f: FunctionDoc,
    /// Base point in lattice units; defaults to the origin.
    #[serde(default)]
    pub x: Option<Vec<i64>>,
    /// `[s, u]`
    pub window: [Real; 2],
}

impl ScenarioDoc {
    pub fn build(&self, base: Option<&Path>) -> Result<Scenario> {
        let (measure, modulator) = self.measure.build()?;
        let LevyMeasure::Discrete(measure) = measure else {
            return Err(Error::UnsupportedMeasure(
                "simulation needs a finite lattice measure; stable measures enter only through symbols".into(),
            ));
        };
        let system = JumpSystem::new(measure, modulator, self.step.0)?;
        let f = self.f.build(self.step.0, base)?;
        let x = self.x.clone().unwrap_or_else(|| vec![0; system.dim()]);
        if x.len() != system.dim() {
            return Err(Error::DimensionMismatch {
                expected: system.dim(),
                found: x.len(),
            });
        }
        Ok(Scenario {
            name: self.name.clone(),
            system,
            f,
            x,
            window: Window::new(self.window[0].0, self.window[1].0)?,
        })
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            name: s.name.clone(),
            measure: MeasureDoc::from_parts(
                &LevyMeasure::Discrete(s.system.measure().clone()),
                s.system.modulator(),
            ),
            step: Real(s.system.step()),
            f: FunctionDoc::Table {
                dims: s.f.dims().to_vec(),
                values: s
                    .f
                    .samples()
                    .iter()
                    .map(|z| {
                        if z.im == 0.0 {
                            SampleDoc::Real(Real(z.re))
                        } else {
                            SampleDoc::Complex([Real(z.re), Real(z.im)])
                        }
                    })
                    .collect(),
            },
            x: Some(s.x.clone()),
            window: [Real(s.window.s), Real(s.window.u)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompensatorDoc {
    #[default]
    Exact,
    GaussLegendre,
}

impl CompensatorDoc {
    pub fn rule(self) -> CompensatorRule {
        match self {
            CompensatorDoc::Exact => CompensatorRule::Exact,
            CompensatorDoc::GaussLegendre => CompensatorRule::gauss_legendre(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalDoc {
    Constant { value: Real },
    JumpIndicator { offset: Vec<i64> },
    JumpCoordinate { axis: usize },
    TimeWeightedJump { offset: Vec<i64>, rate: Real },
    PreJumpCosine { frequency: Vec<Real> },
    PostJumpCosine { frequency: Vec<Real> },
    PositionCoordinate { axis: usize },
}

impl FunctionalDoc {
    pub fn build(&self) -> Functional {
        match self {
            FunctionalDoc::Constant { value } => Functional::Constant(value.0),
            FunctionalDoc::JumpIndicator { offset } => Functional::JumpIndicator(offset.clone()),
            FunctionalDoc::JumpCoordinate { axis } => Functional::JumpCoordinate(*axis),
            FunctionalDoc::TimeWeightedJump { offset, rate } => Functional::TimeWeightedJump {
                offset: offset.clone(),
                rate: rate.0,
            },
            FunctionalDoc::PreJumpCosine { frequency } => {
                Functional::PreJumpCosine(reals(frequency))
            }
            FunctionalDoc::PostJumpCosine { frequency } => {
                Functional::PostJumpCosine(reals(frequency))
            }
            FunctionalDoc::PositionCoordinate { axis } => Functional::PositionCoordinate(*axis),
        }
    }
}

/// Reads a JSON document from `path`, mapping parse errors to
/// [`Error::Format`] with the file name.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_strings_and_numbers_agree() {
        let a: ModulatorDoc = parse_json(r#"{"kind":"constant","re":"0.1","im":0.2}"#).unwrap();
        let b: ModulatorDoc = parse_json(r#"{"kind":"constant","re":0.1,"im":"0.2"}"#).unwrap();
        assert_eq!(a, b);
        assert!(parse_json::<ModulatorDoc>(r#"{"kind":"constant","re":"one"}"#).is_err());
    }

    #[test]
    fn measure_round_trip_is_lossless() {
        let text = r#"{"kind":"discrete","dim":1,
            "atoms":[{"location":["0.1"],"weight":"0.3333333333333333"},{"location":[-0.1],"weight":"0.3333333333333333"}],
            "modulator":{"kind":"sign_pattern","signs":[-1,-1]}}"#;
        let doc: MeasureDoc = parse_json(text).unwrap();
        let (m, phi) = doc.build().unwrap();
        let again: MeasureDoc =
            parse_json(&serde_json::to_string(&MeasureDoc::from_parts(&m, &phi)).unwrap()).unwrap();
        assert_eq!(again, doc);
        let (m2, _) = again.build().unwrap();
        let LevyMeasure::Discrete(d) = m2 else {
            panic!()
        };
        assert_eq!(d.atoms()[0].location[0], 0.1);
        assert_eq!(d.atoms()[0].weight, 1.0 / 3.0);
    }

    #[test]
    fn every_symbol_kind_round_trips() {
        let docs = [
            r#"{"kind":"constant","re":0.5}"#,
            r#"{"kind":"power","alpha":1.5,"axis":0,"dim":2}"#,
            r#"{"kind":"riesz2","axis":1,"dim":2}"#,
            r#"{"kind":"riesz_pair","axes":[0,1],"dim":2}"#,
            r#"{"kind":"riesz_combo","coefficients":[1,-1]}"#,
            r#"{"kind":"beurling_ahlfors"}"#,
            r#"{"kind":"first_order_riesz","axis":0,"dim":2}"#,
            r#"{"kind":"general","measure":{"kind":"stable","dim":2,"alpha":1,"epsilon":1e-4,"modulator":{"kind":"axis_indicator","axis":0}}}"#,
            r#"{"kind":"finite_time","s":-1,"measure":{"kind":"discrete","dim":1,"atoms":[{"location":[1],"weight":1},{"location":[-1],"weight":1}],"modulator":{"kind":"constant","re":1}}}"#,
        ];
        for text in docs {
            let doc: SymbolDoc = parse_json(text).unwrap();
            let sym = doc.build().unwrap();
            let back = SymbolDoc::from_kind(sym.kind());
            let rebuilt = back.build().unwrap();
            let xi = [0.7, -1.3];
            let xi = &xi[..sym.dim().unwrap_or(2)];
            assert_eq!(sym.eval(xi).unwrap(), rebuilt.eval(xi).unwrap(), "{text}");
        }
    }

    #[test]
    fn invalid_documents_are_rejected() {
        assert!(parse_json::<SymbolDoc>(r#"{"kind":"power","alpha":1}"#).is_err());
        assert!(
            parse_json::<SymbolDoc>(r#"{"kind":"riesz2","axis":0,"dim":2,"extra":1}"#).is_err()
        );
        let big: SymbolDoc = parse_json(
            r#"{"kind":"general","measure":{"kind":"discrete","dim":1,"atoms":[{"location":[1],"weight":1},{"location":[-1],"weight":1}],"modulator":{"kind":"constant","re":1.5}}}"#,
        )
        .unwrap();
        assert!(big.build().is_err());
    }

    #[test]
    fn scenario_round_trip() {
        for sc in crate::stochastic::shipped_scenarios().unwrap() {
            let doc = ScenarioDoc::from_scenario(&sc);
            let text = serde_json::to_string(&doc).unwrap();
            let back: ScenarioDoc = parse_json(&text).unwrap();
            let rebuilt = back.build(None).unwrap();
            assert_eq!(rebuilt.f, sc.f);
            assert_eq!(rebuilt.system.phi(), sc.system.phi());
            assert_eq!(rebuilt.window, sc.window);
        }
    }
}
