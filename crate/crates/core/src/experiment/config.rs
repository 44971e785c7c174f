//! JSON experiment configuration: one document per run, fully echoed into
//! every report so results stay auditable and diffable.

use crate::error::{Error, Result};
use crate::grid::BoxSpec;
use crate::packet::{GaussianPacket, TestFunction};
use crate::profile::{DampingProfile, StarVariant};
use crate::theta::ThetaMatrix;
use crate::wightman::ModeField;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    StarEval,
    Gram,
    QuotientKrein,
    LimitSweep,
    Hermiticity,
    Cyclicity,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::StarEval => "star_eval",
            Self::Gram => "gram",
            Self::QuotientKrein => "quotient_krein",
            Self::LimitSweep => "limit_sweep",
            Self::Hermiticity => "hermiticity",
            Self::Cyclicity => "cyclicity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "star_eval" => Some(Self::StarEval),
            "gram" => Some(Self::Gram),
            "quotient_krein" => Some(Self::QuotientKrein),
            "limit_sweep" => Some(Self::LimitSweep),
            "hermiticity" => Some(Self::Hermiticity),
            "cyclicity" => Some(Self::Cyclicity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSpec {
    pub dim: usize,
    #[serde(default)]
    pub upper: Vec<(usize, usize, f64)>,
}

impl ThetaSpec {
    pub fn build(&self) -> Result<ThetaMatrix> {
        ThetaMatrix::new(self.dim, &self.upper)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub mass: f64,
    pub box_length: f64,
    pub cutoff: i64,
}

impl FieldSpec {
    pub fn build(&self) -> Result<ModeField> {
        ModeField::new(self.mass, self.box_length, self.cutoff)
    }
}

/// Packet width: per-axis diagonal or a full symmetric matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WidthSpec {
    Diagonal(Vec<f64>),
    Full(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub coeff: (f64, f64),
    pub center: Vec<f64>,
    pub momentum: Vec<f64>,
    pub width: WidthSpec,
}

impl PacketSpec {
    pub fn build(&self) -> Result<GaussianPacket> {
        let d = self.center.len();
        let width = match &self.width {
            WidthSpec::Diagonal(diag) => {
                if diag.len() != d {
                    return Err(Error::invalid(format!(
                        "width diagonal has {} entries for dimension {d}",
                        diag.len()
                    )));
                }
                DMatrix::from_fn(d, d, |i, j| if i == j { diag[i] } else { 0.0 })
            }
            WidthSpec::Full(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::invalid("width matrix shape does not match dimension"));
                }
                DMatrix::from_fn(d, d, |i, j| rows[i][j])
            }
        };
        GaussianPacket::new(
            Complex64::new(self.coeff.0, self.coeff.1),
            self.center.clone(),
            self.momentum.clone(),
            width,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub packets: Vec<PacketSpec>,
}

impl FunctionSpec {
    pub fn build(&self) -> Result<TestFunction> {
        let packets = self
            .packets
            .iter()
            .map(|p| p.build())
            .collect::<Result<Vec<_>>>()?;
        TestFunction::from_packets(&packets)
    }
}

/// A basis vector as a word over function indices; the empty word is the
/// vacuum, `[a, b]` means the operator of function a applied after b.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSpec {
    #[serde(default)]
    pub word: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub n: Vec<usize>,
    #[serde(default = "default_decay_threshold")]
    pub decay_threshold: f64,
}

fn default_decay_threshold() -> f64 {
    1e-9
}

impl GridSpec {
    pub fn build(&self) -> Result<BoxSpec> {
        Ok(BoxSpec::new(self.lo.clone(), self.hi.clone(), self.n.clone())?
            .with_decay_threshold(self.decay_threshold))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VariantSpec {
    Plain,
    XiDamped {
        #[serde(default = "default_xi_c")]
        c: f64,
        theta_sup: f64,
    },
    EtaRegularized {
        alpha: f64,
        epsilon: f64,
    },
}

fn default_xi_c() -> f64 {
    1.0
}

impl VariantSpec {
    pub fn build(&self) -> Result<StarVariant> {
        match self {
            VariantSpec::Plain => Ok(StarVariant::plain()),
            VariantSpec::XiDamped { c, theta_sup } => {
                StarVariant::xi_damped(DampingProfile::gaussian_xi(*c, *theta_sup)?)
            }
            VariantSpec::EtaRegularized { alpha, epsilon } => {
                StarVariant::eta_regularized(DampingProfile::plateau_eta(*alpha, *epsilon)?)
            }
        }
    }
}

/// Check thresholds; every report re-states them so downstream tooling can
/// re-grade the raw data with different values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub gram_hermiticity: f64,
    pub isotropic_rel: f64,
    pub fft_vs_closed: f64,
    pub series_vs_closed: f64,
    pub trace_identity: f64,
    pub krein_reconstruction: f64,
    pub sweep_slope_min: f64,
    pub hermiticity_max: f64,
    pub damped_diagonal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gram_hermiticity: 1e-10,
            isotropic_rel: 1e-10,
            fft_vs_closed: 1e-8,
            series_vs_closed: 1e-6,
            trace_identity: 1e-8,
            krein_reconstruction: 1e-10,
            sweep_slope_min: 0.9,
            hermiticity_max: 1e-11,
            damped_diagonal: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<String>,
}

fn default_budget() -> u64 {
    50_000_000
}

fn default_hermiticity_samples() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub theta: Option<ThetaSpec>,
    #[serde(default)]
    pub field: Option<FieldSpec>,
    #[serde(default)]
    pub functions: Vec<FunctionSpec>,
    #[serde(default)]
    pub vectors: Option<Vec<VectorSpec>>,
    #[serde(default)]
    pub variant: Option<VariantSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub series_order: Option<usize>,
    #[serde(default)]
    pub theta_sweep: Option<Vec<f64>>,
    #[serde(default)]
    pub hermiticity_orders: Option<Vec<usize>>,
    #[serde(default = "default_hermiticity_samples")]
    pub hermiticity_samples: usize,
    #[serde(default)]
    pub max_level: Option<usize>,
    #[serde(default)]
    pub synthetic_gram: Option<Vec<Vec<(f64, f64)>>>,
    #[serde(default)]
    pub expected_signature: Option<(usize, usize)>,
    #[serde(default)]
    pub expected_ranks: Option<Vec<usize>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    /// Parses a JSON document, reporting the offending field path on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            Error::invalid(format!(
                "config parse error at `{}`: {}",
                e.path(),
                e.inner()
            ))
        })
    }

    pub fn require_theta(&self) -> Result<ThetaMatrix> {
        self.theta
            .as_ref()
            .ok_or_else(|| Error::invalid("config is missing the `theta` section"))?
            .build()
    }

    pub fn require_field(&self) -> Result<ModeField> {
        self.field
            .as_ref()
            .ok_or_else(|| Error::invalid("config is missing the `field` section"))?
            .build()
    }

    pub fn build_functions(&self) -> Result<Vec<TestFunction>> {
        self.functions.iter().map(|f| f.build()).collect()
    }

    pub fn require_grid(&self) -> Result<BoxSpec> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::invalid("config is missing the `grid` section"))?
            .build()
    }

    /// Resolves basis vector words against the function list.
    pub fn require_vectors(&self, functions: &[TestFunction]) -> Result<Vec<crate::gns::SequenceVector>> {
        let specs = self
            .vectors
            .as_ref()
            .ok_or_else(|| Error::invalid("config is missing the `vectors` section"))?;
        if specs.is_empty() {
            return Err(Error::invalid("`vectors` must name at least one basis vector"));
        }
        specs
            .iter()
            .map(|v| {
                for &g in &v.word {
                    if g >= functions.len() {
                        return Err(Error::invalid(format!(
                            "vector word references function {g}, but only {} are defined",
                            functions.len()
                        )));
                    }
                }
                crate::gns::word_vector(functions, &v.word)
            })
            .collect()
    }

    pub fn synthetic_matrix(&self) -> Result<Option<DMatrix<Complex64>>> {
        let Some(rows) = &self.synthetic_gram else {
            return Ok(None);
        };
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("synthetic_gram must be a square matrix"));
        }
        Ok(Some(DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(rows[i][j].0, rows[i][j].1)
        })))
    }
}
