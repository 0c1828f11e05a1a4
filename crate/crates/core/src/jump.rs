//! Height jump of the Ceresa cycle at a boundary point of the moduli space of
//! stable curves, computed from the dual graph.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BlockKind, PolarizedWeightedGraph};
use crate::invariants;
use crate::rational::{int, Rational, RationalJson};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VanishingClass {
    Banana,
    LoopsAndBridges,
    Nonvanishing,
}

impl VanishingClass {
    pub fn vanishes(self) -> bool {
        self != VanishingClass::Nonvanishing
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VanishingClass::Banana => "banana",
            VanishingClass::LoopsAndBridges => "loops-and-bridges",
            VanishingClass::Nonvanishing => "nonvanishing",
        }
    }
}

/// Decides whether the slope vanishes from the shape of the minimal model
/// alone: a banana with `g + 1` edges and trivial polarization, or a graph
/// whose blocks are all loops and bridges.
pub fn classify_vanishing(g: &PolarizedWeightedGraph) -> Result<VanishingClass> {
    if g.genus() < 2 {
        return Err(Error::GenusTooSmall(g.genus()));
    }
    let mm = g.minimal_model()?;
    let banana = mm.vertices().len() == 2
        && mm.vertices().iter().all(|v| v.genus == 0)
        && mm.edges().len() == mm.genus() as usize + 1
        && mm.edges().iter().all(|e| !e.is_loop());
    if banana {
        return Ok(VanishingClass::Banana);
    }
    let tree_like = mm.blocks().blocks.iter().all(|b| b.kind != BlockKind::TwoConnected);
    Ok(if tree_like { VanishingClass::LoopsAndBridges } else { VanishingClass::Nonvanishing })
}

/// The jump at lengths given by the graph itself: the slope of the dual
/// graph. Requires a stable graph.
pub fn height_jump(g: &PolarizedWeightedGraph) -> Result<Rational> {
    if g.genus() < 2 {
        return Err(Error::GenusTooSmall(g.genus()));
    }
    if !g.is_stable() {
        return Err(Error::NotStable);
    }
    invariants::slope(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpReport {
    pub jump: Rational,
    pub lambda: Rational,
    /// `λ(G_i)` for the graph keeping only edge `e_i`, by edge id.
    pub contraction_lambdas: BTreeMap<String, Rational>,
    pub residual: Rational,
    pub class: VanishingClass,
}

impl JumpReport {
    pub fn to_json(&self) -> serde_json::Value {
        let lambdas: BTreeMap<_, RationalJson> = self
            .contraction_lambdas
            .iter()
            .map(|(k, v)| (k.clone(), v.into()))
            .collect();
        serde_json::json!({
            "jump": RationalJson::from(&self.jump),
            "lambda": RationalJson::from(&self.lambda),
            "contraction_lambdas": lambdas,
            "residual": RationalJson::from(&self.residual),
            "class": self.class,
        })
    }
}

/// Computes the jump twice: as the slope, and as
/// `(8g+4)(λ(G) - Σ_i λ(G_i))` where `G_i` contracts every edge but `e_i`.
/// Both λ's come from the Green's-function pipeline, and each `λ(G_i)` is
/// also checked against the loop and segment closed forms.
pub fn jump_crosscheck(g: &PolarizedWeightedGraph) -> Result<JumpReport> {
    height_jump(g)?;
    contraction_identity(g)
}

/// The identity behind [`jump_crosscheck`] for any polarized model, stable
/// or not.
pub fn contraction_identity(g: &PolarizedWeightedGraph) -> Result<JumpReport> {
    let jump = invariants::slope(g)?;
    let genus = g.genus() as i64;
    let scale = int(8 * genus + 4);
    let lambda = invariants::lambda_direct(g)?;
    let bridges = g.bridges();
    let mut contraction_lambdas = BTreeMap::new();
    let mut sum = Rational::zero();
    for (i, e) in g.edges().iter().enumerate() {
        let c = g.contract_all_but(i)?;
        let li = invariants::lambda_direct(&c.graph)?;
        let expected = if bridges[i] {
            let h = g.bridge_type(i) as i64;
            int(4 * h * (genus - h)) * &e.length / &scale
        } else {
            int(genus) * &e.length / &scale
        };
        if li != expected {
            return Err(Error::IdentityViolation(format!(
                "lambda of the contraction to `{}` is {li}, expected {expected}",
                e.id
            )));
        }
        sum += &li;
        contraction_lambdas.insert(e.id.clone(), li);
    }
    let residual = &jump - &scale * (&lambda - &sum);
    if !residual.is_zero() {
        return Err(Error::IdentityViolation(format!("jump residual {residual}")));
    }
    let class = classify_vanishing(g)?;
    Ok(JumpReport { jump, lambda, contraction_lambdas, residual, class })
}
