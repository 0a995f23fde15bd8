//! Problem files: media, source cap, targets and solver settings.

use std::fmt::Write as _;
use std::path::Path;

use refractor_core::fresnel::FresnelMaterial;
use refractor_core::norms::{MediumPair, Norm, NormKind, Regime};
use refractor_core::quadrature::{SourceDensity, SourceProfile, SphericalCap};
use refractor_core::solver::TargetMeasure;
use refractor_core::{Mat, Vector};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Offending pairs listed in an admissibility error before truncating.
const LISTED_PAIRS: usize = 10;
const ADMISSIBLE_TOL: f64 = 1e-12;

/// A norm as stored in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NormSpec {
    Ellipsoidal {
        #[serde(rename = "A")]
        a: [[f64; 3]; 3],
    },
    Lq {
        q: f64,
    },
}

impl NormSpec {
    pub fn build(&self) -> Result<Norm<3>, CliError> {
        Ok(match self {
            NormSpec::Ellipsoidal { a } => Norm::ellipsoidal(Mat::from_rows(*a))?,
            NormSpec::Lq { q } => Norm::lq(*q)?,
        })
    }

    pub fn from_norm(n: &Norm<3>) -> Self {
        match n.kind() {
            NormKind::Ellipsoidal(a) => NormSpec::Ellipsoidal { a: a.0 },
            NormKind::Lq(q) => NormSpec::Lq { q },
        }
    }
}

/// Permittivity and permeability of a material.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub eps: [[f64; 3]; 3],
    pub mu: [[f64; 3]; 3],
}

impl MaterialSpec {
    pub fn build(&self) -> Result<FresnelMaterial, CliError> {
        Ok(FresnelMaterial::new(Mat::from_rows(self.eps), Mat::from_rows(self.mu))?)
    }

    fn norm(&self, which: &str) -> Result<Norm<3>, CliError> {
        self.build()?.induced_norm().map_err(|e| {
            CliError::Validation(format!("{which} does not induce a norm: {e}"))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixMedia {
    #[serde(rename = "A1")]
    pub a1: [[f64; 3]; 3],
    #[serde(rename = "A2")]
    pub a2: [[f64; 3]; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialMedia {
    pub material1: MaterialSpec,
    pub material2: MaterialSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexMedia {
    pub n1: f64,
    pub n2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormMedia {
    #[serde(rename = "N1")]
    pub n1: NormSpec,
    #[serde(rename = "N2")]
    pub n2: NormSpec,
}

/// The two media, in any of four spellings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MediaSpec {
    Matrices(MatrixMedia),
    Materials(MaterialMedia),
    Indices(IndexMedia),
    Norms(NormMedia),
}

impl MediaSpec {
    pub fn build(&self) -> Result<MediumPair<3>, CliError> {
        let (n1, n2) = match self {
            MediaSpec::Matrices(m) => (
                Norm::ellipsoidal(Mat::from_rows(m.a1))?,
                Norm::ellipsoidal(Mat::from_rows(m.a2))?,
            ),
            MediaSpec::Materials(m) => (m.material1.norm("material1")?, m.material2.norm("material2")?),
            MediaSpec::Indices(m) => (Norm::isotropic(m.n1)?, Norm::isotropic(m.n2)?),
            MediaSpec::Norms(m) => (m.n1.build()?, m.n2.build()?),
        };
        Ok(MediumPair::new(n1, n2)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensitySpec {
    Uniform,
    Cosine,
}

impl From<DensitySpec> for SourceProfile {
    fn from(d: DensitySpec) -> Self {
        match d {
            DensitySpec::Uniform => SourceProfile::Uniform,
            DensitySpec::Cosine => SourceProfile::Cosine,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub axis: [f64; 3],
    pub angle: f64,
    pub node_count: usize,
    pub density: DensitySpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub m: [f64; 3],
    pub g: f64,
}

/// Contents of a problem file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub media: MediaSpec,
    pub source: SourceSpec,
    pub targets: Vec<TargetSpec>,
    pub b1: f64,
    pub tol: f64,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("problem: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::from_json(&crate::read(path)?)
    }
}

/// A validated problem ready for the solver.
#[derive(Clone, Debug)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub pair: MediumPair<3>,
    pub source: SourceDensity<3>,
    /// Directions on `Σ₂`, masses rescaled to the source total.
    pub target: TargetMeasure<3>,
}

impl Problem {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::new(ProblemSpec::load(path)?)
    }

    pub fn new(spec: ProblemSpec) -> Result<Self, CliError> {
        if !(spec.b1 > 0.0 && spec.b1.is_finite()) {
            return Err(CliError::Validation("b1 must be positive".into()));
        }
        if !(spec.tol > 0.0 && spec.tol.is_finite()) {
            return Err(CliError::Validation("tol must be positive".into()));
        }
        if spec.targets.is_empty() {
            return Err(CliError::Validation("at least one target is required".into()));
        }
        let pair = spec.media.build()?;
        let cap = SphericalCap::new(Vector::new(spec.source.axis), spec.source.angle)?;
        let source = cap.discretize(pair.n1(), spec.source.node_count, spec.source.density.into())?;

        let mut dirs = Vec::with_capacity(spec.targets.len());
        let mut masses = Vec::with_capacity(spec.targets.len());
        for (i, t) in spec.targets.iter().enumerate() {
            if !(t.g > 0.0 && t.g.is_finite()) {
                return Err(CliError::Validation(format!("target {i}: g must be positive")));
            }
            let m = Vector::new(t.m);
            let n = pair.n2().eval(&m);
            if !(n > 0.0 && n.is_finite()) {
                return Err(CliError::Validation(format!("target {i}: m must be a nonzero vector")));
            }
            dirs.push(m / n);
            masses.push(t.g);
        }
        let sum: f64 = masses.iter().sum();
        let total = source.total();
        let masses = masses.iter().map(|g| total * (g / sum)).collect();
        let target = TargetMeasure::new(pair.n2(), dirs, masses)?;
        check_admissible(&pair, &source, &target)?;
        Ok(Self {
            spec,
            pair,
            source,
            target,
        })
    }
}

/// Every node must see an admissible target: in Case I all pairs need
/// `m·p₁(x) ≥ 1`, in Case II each node needs some `x·p₂(m) > 1`.
fn check_admissible(
    pair: &MediumPair<3>,
    src: &SourceDensity<3>,
    tgt: &TargetMeasure<3>,
) -> Result<(), CliError> {
    let mut bad = Vec::new();
    match pair.regime() {
        Regime::CaseI => {
            for (j, x) in src.nodes().iter().enumerate() {
                let p1 = pair.n1().gradient(x)?;
                for (i, m) in tgt.directions().iter().enumerate() {
                    let v = m.dot(&p1);
                    if v < 1.0 - ADMISSIBLE_TOL {
                        bad.push((j, i, v));
                    }
                }
            }
        }
        Regime::CaseII => {
            let p2m = tgt
                .directions()
                .iter()
                .map(|m| pair.n2().gradient(m))
                .collect::<Result<Vec<_>, _>>()?;
            for (j, x) in src.nodes().iter().enumerate() {
                let (i, v) = p2m
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i, x.dot(p)))
                    .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
                if v <= 1.0 + ADMISSIBLE_TOL {
                    bad.push((j, i, v));
                }
            }
        }
    }
    if bad.is_empty() {
        return Ok(());
    }
    let (what, cond) = match pair.regime() {
        Regime::CaseI => ("pairs violate", "m.p1(x) >= 1"),
        Regime::CaseII => ("nodes reach no target with", "x.p2(m) > 1"),
    };
    let mut msg = format!("{} {what} {cond}:", bad.len());
    for &(j, i, v) in bad.iter().take(LISTED_PAIRS) {
        let x = src.nodes()[j].0;
        let m = tgt.directions()[i].0;
        let _ = write!(msg, "\n  x_{j} = {x:?}, m_{i} = {m:?} (value {v})");
    }
    if bad.len() > LISTED_PAIRS {
        let _ = write!(msg, "\n  ... and {} more", bad.len() - LISTED_PAIRS);
    }
    Err(CliError::Validation(msg))
}
