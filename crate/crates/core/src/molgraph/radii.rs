use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BondOrder, Element, GraphError};

/// Multipliers applied to `r_i + r_j` to obtain a tabulated bond length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderFactors {
    pub single: f64,
    pub aromatic: f64,
    pub double: f64,
    pub triple: f64,
}

impl Default for OrderFactors {
    fn default() -> Self {
        OrderFactors {
            single: 1.00,
            aromatic: 0.93,
            double: 0.87,
            triple: 0.78,
        }
    }
}

impl OrderFactors {
    pub fn factor(&self, order: BondOrder) -> f64 {
        match order {
            BondOrder::Single => self.single,
            BondOrder::Aromatic => self.aromatic,
            BondOrder::Double => self.double,
            BondOrder::Triple => self.triple,
        }
    }
}

/// Covalent radii (angstrom) per element plus bond-order length factors.
///
/// Serialized as `{"radii": {"C": 0.76, ...}, "order_factors": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiiTable {
    #[serde(default = "default_radii")]
    pub radii: BTreeMap<Element, f64>,
    #[serde(default)]
    pub order_factors: OrderFactors,
}

fn default_radii() -> BTreeMap<Element, f64> {
    use Element::*;
    [
        (C, 0.76),
        (H, 0.31),
        (O, 0.66),
        (N, 0.71),
        (P, 1.07),
        (S, 1.05),
        (F, 0.57),
        (Cl, 1.02),
        (Br, 1.20),
        (I, 1.39),
    ]
    .into_iter()
    .collect()
}

impl Default for RadiiTable {
    fn default() -> Self {
        RadiiTable {
            radii: default_radii(),
            order_factors: OrderFactors::default(),
        }
    }
}

impl RadiiTable {
    pub fn validate(&self) -> Result<(), GraphError> {
        for (&element, &radius) in &self.radii {
            if !(radius > 0.2 && radius < 2.0) {
                return Err(GraphError::RadiusOutOfRange { element, radius });
            }
        }
        let f = &self.order_factors;
        for (name, value) in [
            ("single", f.single),
            ("aromatic", f.aromatic),
            ("double", f.double),
            ("triple", f.triple),
        ] {
            if !(value > 0.0) {
                return Err(GraphError::InvalidOrderFactor { name, value });
            }
        }
        Ok(())
    }

    pub fn radius(&self, element: Element) -> Result<f64, GraphError> {
        self.radii
            .get(&element)
            .copied()
            .ok_or(GraphError::ElementMissingFromTable(element))
    }

    /// `sigma_ij = r_i + r_j`.
    pub fn radius_sum(&self, a: Element, b: Element) -> Result<f64, GraphError> {
        Ok(self.radius(a)? + self.radius(b)?)
    }
}

/// Tabulated equilibrium length `factor(order) * (r_i + r_j)`.
pub fn edge_length(
    order: BondOrder,
    a: Element,
    b: Element,
    radii: &RadiiTable,
) -> Result<f64, GraphError> {
    Ok(radii.order_factors.factor(order) * radii.radius_sum(a, b)?)
}
