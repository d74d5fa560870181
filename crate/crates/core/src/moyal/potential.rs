use super::MoyalError;

/// Polynomial potential `U(q) = Σ u_r q^r` with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    coeffs: Vec<f64>,
}

/// Builds a potential from `u_0, u_1, ...`; trailing zeros are dropped.
pub fn poly_potential(coeffs: &[f64]) -> Result<Potential, MoyalError> {
    if coeffs.is_empty() {
        return Err(MoyalError::EmptyPotential);
    }
    if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
        return Err(MoyalError::InvalidPotential(format!("coefficient {bad} is not finite")));
    }
    let mut coeffs = coeffs.to_vec();
    while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
        coeffs.pop();
    }
    Ok(Potential { coeffs })
}

impl Potential {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree of the polynomial; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn derivative(&self, order: usize) -> Potential {
        if order > self.degree() {
            return Potential { coeffs: vec![0.0] };
        }
        let coeffs = self.coeffs[order..]
            .iter()
            .enumerate()
            .map(|(i, c)| c * ((i + 1)..=(i + order)).map(|v| v as f64).product::<f64>())
            .collect();
        Potential { coeffs }
    }

    pub fn eval(&self, q: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * q + c)
    }
}
