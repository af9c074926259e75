//! JSON exchange formats. Scalars are strings `u*p^v (mod p^w)`, `0 (mod p^w)`
//! or `0`; series are `{"pi_coeffs": [[...], ...]}` with one inner list of
//! π-coefficients per power of X.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use wachfam_core::lambda::LambdaPair;
use wachfam_core::{
    FamilySeries, FrobeniusMatrix, GammaElement, LiftContext, Mat2, PadicScalar, PiSeries,
    PrecisionProfile, WachFamily,
};

use crate::error::{AppError, Result};

pub const FAMILY_FORMAT: &str = "wachfam-family/1";
pub const LAMBDA_FORMAT: &str = "wachfam-lambda/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileHeader {
    pub p: u32,
    pub cap_p: u32,
    pub cap_pi: usize,
    pub cap_x: usize,
}

impl ProfileHeader {
    pub fn profile(&self) -> Result<PrecisionProfile> {
        Ok(PrecisionProfile::new(
            self.p,
            self.cap_p,
            self.cap_pi,
            self.cap_x,
        )?)
    }
}

impl From<&PrecisionProfile> for ProfileHeader {
    fn from(p: &PrecisionProfile) -> Self {
        ProfileHeader {
            p: p.p(),
            cap_p: p.cap_p(),
            cap_pi: p.cap_pi(),
            cap_x: p.cap_x(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub pi_coeffs: Vec<Vec<String>>,
}

pub fn parse_scalar(s: &str, p: u32) -> Result<PadicScalar> {
    PadicScalar::parse_with(s, p, 0).map_err(|e| AppError::parse(format!("scalar {s:?}"), e))
}

impl SeriesJson {
    pub fn from_pi(s: &PiSeries) -> Self {
        SeriesJson {
            pi_coeffs: vec![s.coeffs().iter().map(ToString::to_string).collect()],
        }
    }

    pub fn from_family(f: &FamilySeries) -> Self {
        SeriesJson {
            pi_coeffs: f
                .columns()
                .iter()
                .map(|c| c.coeffs().iter().map(ToString::to_string).collect())
                .collect(),
        }
    }

    fn columns(&self, p: u32, cap_pi: usize) -> Result<Vec<PiSeries>> {
        self.pi_coeffs
            .iter()
            .map(|col| {
                if col.len() != cap_pi {
                    return Err(AppError::parse(
                        "series",
                        format!("expected {cap_pi} π-coefficients, found {}", col.len()),
                    ));
                }
                let coeffs = col
                    .iter()
                    .map(|c| parse_scalar(c, p))
                    .collect::<Result<Vec<_>>>()?;
                Ok(PiSeries::from_coeffs(p, cap_pi, coeffs))
            })
            .collect()
    }

    pub fn to_pi(&self, p: u32, cap_pi: usize) -> Result<PiSeries> {
        let mut cols = self.columns(p, cap_pi)?;
        if cols.len() != 1 {
            return Err(AppError::parse("series", "expected a series without X"));
        }
        Ok(cols.remove(0))
    }

    pub fn to_family(&self, p: u32, cap_pi: usize, cap_x: usize) -> Result<FamilySeries> {
        let cols = self.columns(p, cap_pi)?;
        if cols.len() != cap_x {
            return Err(AppError::parse(
                "series",
                format!("expected {cap_x} X-degrees, found {}", cols.len()),
            ));
        }
        Ok(FamilySeries::from_columns(&cols)?)
    }
}

pub type MatJson = [[SeriesJson; 2]; 2];

fn mat_to_json(m: &Mat2<FamilySeries>) -> MatJson {
    let e = m.map(SeriesJson::from_family).e;
    e
}

fn mat_from_json(m: &MatJson, h: &ProfileHeader) -> Result<Mat2<FamilySeries>> {
    let f = |s: &SeriesJson| s.to_family(h.p, h.cap_pi, h.cap_x);
    Ok(Mat2::new(
        f(&m[0][0])?,
        f(&m[0][1])?,
        f(&m[1][0])?,
        f(&m[1][1])?,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaEntry {
    pub chi: String,
    pub g: MatJson,
}

/// A family on disk: profile, k, m, z, P and G_γ keyed by χ(γ).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub format: String,
    pub profile: ProfileHeader,
    pub k: u32,
    pub m: u32,
    pub z: SeriesJson,
    #[serde(rename = "P")]
    pub p_matrix: MatJson,
    #[serde(rename = "G")]
    pub g: BTreeMap<String, GammaEntry>,
}

/// A family read back from disk, with P exactly as stored.
#[derive(Clone, Debug)]
pub struct LoadedFamily {
    pub family: WachFamily,
    pub stored_p: Mat2<FamilySeries>,
}

impl FamilyFile {
    pub fn from_family(family: &WachFamily) -> Self {
        let g = family
            .gammas()
            .map(|(gamma, m)| {
                (
                    gamma.key(),
                    GammaEntry {
                        chi: gamma.chi().to_string(),
                        g: mat_to_json(m),
                    },
                )
            })
            .collect();
        FamilyFile {
            format: FAMILY_FORMAT.to_string(),
            profile: family.profile().into(),
            k: family.k(),
            m: family.m(),
            z: SeriesJson::from_pi(family.z()),
            p_matrix: mat_to_json(&family.p_matrix().to_mat()),
            g,
        }
    }

    pub fn load(&self) -> Result<LoadedFamily> {
        if self.format != FAMILY_FORMAT {
            return Err(AppError::parse(
                "family file",
                format!("unknown format {:?}", self.format),
            ));
        }
        let h = &self.profile;
        let profile = h.profile()?;
        let z = self.z.to_pi(h.p, h.cap_pi)?;
        let stored_p = mat_from_json(&self.p_matrix, h)?;
        let c = stored_p.e[1][0].column(0);
        let pm = FrobeniusMatrix::new(c, stored_p.e[1][1].clone(), profile.lift_digits())?;
        let ctx = LiftContext::from_parts(profile, self.k, self.m, z, pm)?;
        let mut lifts = Vec::with_capacity(self.g.len());
        for (key, entry) in &self.g {
            let gamma = GammaElement::new(parse_scalar(&entry.chi, h.p)?)?;
            if &gamma.key() != key {
                return Err(AppError::parse(
                    "family file",
                    format!("key {key} does not match χ = {}", entry.chi),
                ));
            }
            lifts.push((gamma, mat_from_json(&entry.g, h)?));
        }
        Ok(LoadedFamily {
            family: WachFamily::assemble(ctx, lifts)?,
            stored_p,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("family files serialize");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| AppError::parse("family file", e))
    }
}

/// Cached λ pair for one (p, cap_p, cap_pi).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaFile {
    pub format: String,
    pub p: u32,
    pub cap_p: u32,
    pub cap_pi: usize,
    pub factors_used: usize,
    pub lambda_plus: SeriesJson,
    pub lambda_minus: SeriesJson,
}

impl LambdaFile {
    pub fn new(profile: &PrecisionProfile, pair: &LambdaPair) -> Self {
        LambdaFile {
            format: LAMBDA_FORMAT.to_string(),
            p: profile.p(),
            cap_p: profile.cap_p(),
            cap_pi: profile.cap_pi(),
            factors_used: pair.factors_used,
            lambda_plus: SeriesJson::from_pi(&pair.lambda_plus),
            lambda_minus: SeriesJson::from_pi(&pair.lambda_minus),
        }
    }

    pub fn pair(&self) -> Result<LambdaPair> {
        if self.format != LAMBDA_FORMAT {
            return Err(AppError::parse(
                "λ cache file",
                format!("unknown format {:?}", self.format),
            ));
        }
        Ok(LambdaPair {
            lambda_plus: self.lambda_plus.to_pi(self.p, self.cap_pi)?,
            lambda_minus: self.lambda_minus.to_pi(self.p, self.cap_pi)?,
            factors_used: self.factors_used,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip() {
        let p = 5;
        let s = PiSeries::from_coeffs(
            p,
            4,
            vec![
                PadicScalar::from_i64(p, 7, 6),
                PadicScalar::zero(p),
                PadicScalar::zero_mod(p, 3),
                PadicScalar::p_power(p, -2, 4),
            ],
        );
        let json = SeriesJson::from_pi(&s);
        assert_eq!(json.pi_coeffs[0][1], "0");
        assert_eq!(json.to_pi(p, 4).unwrap(), s);
        assert!(json.to_pi(p, 5).is_err());
    }
}
