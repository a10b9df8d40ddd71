use super::NetError;

pub const DEFAULT_MARGIN: f64 = 1.0;

/// `D_w = sqrt(Σ (a_i - b_i)²)`.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64, NetError> {
    if a.len() != b.len() {
        return Err(NetError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// `L = (1-y)·½·D² + y·½·max(0, m - D)²` with `y = 0` for similar pairs.
pub fn contrastive_loss(distance: f64, y: f64, margin: f64) -> f64 {
    let hinge = (margin - distance).max(0.0);
    (1.0 - y) * 0.5 * distance * distance + y * 0.5 * hinge * hinge
}

/// `∂L/∂D`; the hinge has subgradient 0 at `D = m`.
pub fn contrastive_loss_grad(distance: f64, y: f64, margin: f64) -> f64 {
    let hinge = (margin - distance).max(0.0);
    (1.0 - y) * distance - y * hinge
}
