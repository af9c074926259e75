use std::path::PathBuf;

use rayon::prelude::*;
use wachfam_core::lambda::gamma_element;
use wachfam_core::wach::standard_gammas;
use wachfam_core::{
    GammaElement, LambdaEngine, LiftContext, PadicScalar, PrecisionProfile, Valuation, WachFamily,
};

use crate::error::{AppError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

/// Everything one invocation needs, validated up front.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub profile: PrecisionProfile,
    pub k: Option<u32>,
    pub k_max: Option<u32>,
    /// χ values of the stored Γ-elements; empty means the standard set.
    pub chis: Vec<i64>,
    pub alphas: Vec<PadicScalar>,
    pub format: OutputFormat,
    pub cache_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(p: u32, cap_p: u32, cap_pi: usize, cap_x: usize) -> Result<Self> {
        Ok(RunConfig {
            profile: PrecisionProfile::new(p, cap_p, cap_pi, cap_x)?,
            k: None,
            k_max: None,
            chis: Vec::new(),
            alphas: Vec::new(),
            format: OutputFormat::Text,
            cache_dir: None,
        })
    }

    pub fn require_k(&self) -> Result<u32> {
        let k = self
            .k
            .ok_or_else(|| AppError::Config("--k is required".into()))?;
        check_k(&self.profile, k)?;
        Ok(k)
    }

    pub fn gammas(&self) -> Result<Vec<GammaElement>> {
        if self.chis.is_empty() {
            return Ok(standard_gammas(&self.profile)?);
        }
        self.chis
            .iter()
            .map(|&c| {
                gamma_element(&self.profile, c)
                    .map_err(|_| AppError::Config(format!("χ = {c} is not a p-adic unit")))
            })
            .collect()
    }
}

pub fn check_k(profile: &PrecisionProfile, k: u32) -> Result<()> {
    if k < 2 {
        return Err(AppError::Config(format!("k = {k} must be at least 2")));
    }
    if profile.cap_pi() < k as usize {
        return Err(AppError::Config(format!(
            "cap_pi = {} must be at least k = {k}",
            profile.cap_pi()
        )));
    }
    Ok(())
}

/// Parse an evaluation point (`u*p^v`, `u*p^v (mod p^w)` or an integer);
/// it must lie in pZ_p.
pub fn parse_alpha(s: &str, profile: &PrecisionProfile) -> Result<PadicScalar> {
    let a = PadicScalar::parse_with(s, profile.p(), profile.lift_digits())
        .map_err(|e| AppError::Config(format!("--alpha {s:?}: {e}")))?;
    match a.valuation() {
        Valuation::Exact(v) if v < 1 => Err(AppError::Config(format!(
            "--alpha {s:?} is not divisible by p"
        ))),
        _ => Ok(a),
    }
}

/// Build the family for weight k, lifting each γ on the thread pool.
pub fn build_family(
    engine: &LambdaEngine,
    k: u32,
    gammas: &[GammaElement],
) -> Result<(WachFamily, usize)> {
    check_k(engine.profile(), k)?;
    let zdata = engine.standard_z(k)?;
    let ctx = LiftContext::new(*engine.profile(), &zdata)?;
    let lifts = gammas
        .par_iter()
        .map(|g| ctx.lift_full(g))
        .collect::<wachfam_core::Result<Vec<_>>>()?;
    let order = lifts
        .iter()
        .map(|l| l.residual_order)
        .min()
        .unwrap_or(engine.profile().cap_pi());
    let family = WachFamily::assemble(ctx, lifts.into_iter().map(|l| (l.gamma, l.g)).collect())?;
    Ok((family, order))
}
