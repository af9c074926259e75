//! Stable identifiers for every checked identity. Reports and error values
//! carry these so that harnesses can grep for individual results.

pub const LAMBDA_CONSTANT_TERMS: &str = "lambda.constant_terms";
pub const LAMBDA_RING_R: &str = "lambda.ring_r";
pub const LAMBDA_FROBENIUS: &str = "lambda.frobenius_relations";
pub const LAMBDA_GAMMA_RATIO: &str = "lambda.gamma_ratio";
pub const LAMBDA_STABILIZED: &str = "lambda.stabilized";
pub const Z_STORED: &str = "z.stored_matches";
pub const Z_INTEGRAL: &str = "z.integral";
pub const Z_GROWTH: &str = "z.growth_bound";
pub const Z_MINIMAL_M: &str = "z.minimal_m";
pub const FAMILY_P: &str = "family.p_matrix";
pub const SEED_SHAPE: &str = "seed.residual_shape";
pub const LIFT_SOLVE: &str = "lift.solve_operator";
pub const LIFT_MONOTONE: &str = "lift.monotone";
pub const LIFT_STABLE: &str = "lift.stable_lower_orders";
pub const LIFT_COMMUTATION: &str = "lift.commutation";
pub const LIFT_SHAPE: &str = "lift.identity_mod_pi";
pub const LIFT_INTEGRAL: &str = "lift.integral";
pub const LIFT_UNIQUENESS: &str = "lift.uniqueness";
pub const LIFT_X_FUNCTORIAL: &str = "lift.x_functoriality";
pub const COCYCLE: &str = "cocycle";
pub const DET_INVARIANT: &str = "det.invariant";
pub const SPECIALIZE: &str = "specialize.relations";
pub const FIL_BASIS: &str = "fil.basis";
pub const DCRIS_FORM: &str = "dcris.form";
pub const CONGRUENCE_MOD_P: &str = "congruence.mod_p";
pub const CONGRUENCE_MOD_P_I: &str = "congruence.mod_p_i";
pub const BOUND_TABLE: &str = "bounds.table";
pub const SERIALIZATION: &str = "serialization.roundtrip";

/// One-line statement of the identity a claim id certifies.
pub fn statement(id: &str) -> &'static str {
    match id {
        LAMBDA_CONSTANT_TERMS => "λ+(0) = λ−(0) = 1",
        LAMBDA_RING_R => "λ± lie in R = { Σ a_i π^i : v_p(a_i) + i/(p−1) ≥ 0 }",
        LAMBDA_FROBENIUS => "φ(λ−) = λ+ and φ(λ+)·q/p = λ−",
        LAMBDA_GAMMA_RATIO => "λ±/γ(λ±) ∈ 1 + πZ_p[[π]]",
        LAMBDA_STABILIZED => "the next factor of each λ product is 1 at working precision",
        Z_STORED => "the stored z is the truncation of p^m (λ−/λ+)^{k−1}",
        Z_INTEGRAL => "z = p^m (λ−/λ+)^{k−1} mod π^{k−1} is integral for m = ⌊(k−2)/(p−1)⌋",
        Z_GROWTH => "v_p(z_i) + i/(p−1) ≥ m for every coefficient of p^m (λ−/λ+)^{k−1}",
        Z_MINIMAL_M => "minimal_m(p+1) = 0 and minimal_m(k) ≤ ⌊(k−2)/(p−1)⌋",
        FAMILY_P => "P = [[0, −1], [q^{k−1}, X z]]",
        SEED_SHAPE => "the seed residual is [[0, 0], [0, π^{k−1}·(integral)]]",
        LIFT_SOLVE => "the level-ℓ solve operator is invertible mod (p, X), unipotent at ℓ = k",
        LIFT_MONOTONE => "after level ℓ the residual vanishes mod π^ℓ",
        LIFT_STABLE => "G^(ℓ) ≡ G^(ℓ−1) mod π^{ℓ−1}",
        LIFT_COMMUTATION => "P φ(G_γ) = G_γ γ(P)",
        LIFT_SHAPE => "G_γ ≡ Id mod π",
        LIFT_INTEGRAL => "G_γ has integral entries",
        LIFT_UNIQUENESS => "no other G ≡ Id mod π satisfies the commutation relation",
        LIFT_X_FUNCTORIAL => "lifting commutes with X := α",
        COCYCLE => "G_{γη} = G_γ · γ(G_η)",
        DET_INVARIANT => "det G_γ = ((λ+λ−)/γ(λ+λ−))^{k−1}, independent of X",
        SPECIALIZE => "P_α φ(G_α) = G_α γ(P_α) after X := α",
        FIL_BASIS => "Fil^i N is spanned by π^{max(0, i−k+1)} n1 and π^{max(0, i)} n2",
        DCRIS_FORM => "N/πN is [[0, −1], [p^{k−1}, a_p]] with jumps {0, k−1}",
        CONGRUENCE_MOD_P => "P_α, G_α ≡ P_0, G_0 mod p",
        CONGRUENCE_MOD_P_I => "α1 ≡ α2 mod p^i implies equal matrices mod p^i",
        BOUND_TABLE => "reduction bounds 0, 1, 2 up to k = p+1, 2p−1, 3p−2",
        SERIALIZATION => "the family file round-trips losslessly",
        _ => "",
    }
}
