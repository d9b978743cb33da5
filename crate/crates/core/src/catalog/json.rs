//! JSON form `{"dim": n, "kind": "...", "params": {...}}` of catalog objects.

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{DiscreteMeasure, FunctionObject, MeasureAtom};
use crate::error::{FresnelError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub dim: usize,
    pub kind: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantP {
    value: Complex64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaneWaveP {
    k: Vec<f64>,
    #[serde(default)]
    hbar_scaled: bool,
    #[serde(default)]
    normalized: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianP {
    z: Vec<Complex64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChirpP {
    sign: i8,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureP {
    atoms: Vec<MeasureAtom>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyP {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorP {
    factors: Vec<FunctionSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComboTerm {
    coeff: Complex64,
    f: FunctionSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComboP {
    terms: Vec<ComboTerm>,
}

fn params_of<T: DeserializeOwned>(kind: &str, v: &Value) -> Result<T> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| FresnelError::Config(format!("{kind}: {e}")))
}

impl FunctionSpec {
    pub fn to_object(&self) -> Result<FunctionObject> {
        let p = &self.params;
        let f = match self.kind.as_str() {
            "Constant" => {
                let c: ConstantP = params_of("Constant", p)?;
                FunctionObject::constant(self.dim, c.value)?
            }
            "PlaneWave" => {
                let c: PlaneWaveP = params_of("PlaneWave", p)?;
                FunctionObject::plane_wave(c.k, c.hbar_scaled, c.normalized)?
            }
            "ComplexGaussian" => {
                let c: GaussianP = params_of("ComplexGaussian", p)?;
                FunctionObject::complex_gaussian(c.z)?
            }
            "Chirp" => {
                let c: ChirpP = params_of("Chirp", p)?;
                FunctionObject::chirp(self.dim, c.sign)?
            }
            "FourierMeasure" => {
                let c: MeasureP = params_of("FourierMeasure", p)?;
                FunctionObject::fourier_measure(DiscreteMeasure::new(self.dim, c.atoms)?)?
            }
            "CosNorm" => {
                let _: EmptyP = params_of("CosNorm", p)?;
                FunctionObject::cos_norm(self.dim)?
            }
            "Tensor" => {
                let c: TensorP = params_of("Tensor", p)?;
                let fs = c.factors.iter().map(|s| s.to_object()).collect::<Result<Vec<_>>>()?;
                if fs.is_empty() {
                    return Err(FresnelError::Config("Tensor needs factors".into()));
                }
                FunctionObject::Tensor(fs)
            }
            "AffineCombo" => {
                let c: ComboP = params_of("AffineCombo", p)?;
                let ts = c
                    .terms
                    .iter()
                    .map(|t| Ok((t.coeff, t.f.to_object()?)))
                    .collect::<Result<Vec<_>>>()?;
                if ts.is_empty() {
                    return Err(FresnelError::Config("AffineCombo needs terms".into()));
                }
                FunctionObject::affine_combo(ts)?
            }
            "Sampled" => {
                return Err(FresnelError::Config("Sampled functions cannot be read from JSON".into()))
            }
            other => return Err(FresnelError::Config(format!("unknown function kind '{other}'"))),
        };
        f.validate()?;
        if f.dim() != self.dim {
            return Err(FresnelError::Config(format!(
                "{}: declared dim {} but parameters give {}",
                self.kind,
                self.dim,
                f.dim()
            )));
        }
        Ok(f)
    }

    pub fn from_object(f: &FunctionObject) -> Result<Self> {
        let params = match f {
            FunctionObject::Constant { value, .. } => json!({ "value": value }),
            FunctionObject::PlaneWave { k, hbar_scaled, normalized } => {
                json!({ "k": k, "hbar_scaled": hbar_scaled, "normalized": normalized })
            }
            FunctionObject::ComplexGaussian { z } => json!({ "z": z }),
            FunctionObject::Chirp { sign, .. } => json!({ "sign": sign }),
            FunctionObject::FourierMeasure(mu) => json!({ "atoms": mu.atoms }),
            FunctionObject::CosNorm { .. } => json!({}),
            FunctionObject::Tensor(fs) => {
                let specs = fs.iter().map(FunctionSpec::from_object).collect::<Result<Vec<_>>>()?;
                json!({ "factors": specs })
            }
            FunctionObject::AffineCombo(ts) => {
                let terms = ts
                    .iter()
                    .map(|(c, g)| Ok(json!({ "coeff": c, "f": FunctionSpec::from_object(g)? })))
                    .collect::<Result<Vec<_>>>()?;
                json!({ "terms": terms })
            }
            FunctionObject::Sampled(_) => {
                return Err(FresnelError::Config("Sampled functions cannot be serialized".into()))
            }
        };
        Ok(FunctionSpec { dim: f.dim(), kind: f.kind_name().to_string(), params })
    }
}

impl FunctionObject {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: FunctionSpec =
            serde_json::from_str(s).map_err(|e| FresnelError::Config(e.to_string()))?;
        spec.to_object()
    }

    pub fn to_json(&self) -> Result<String> {
        let spec = FunctionSpec::from_object(self)?;
        serde_json::to_string(&spec).map_err(|e| FresnelError::Config(e.to_string()))
    }
}
