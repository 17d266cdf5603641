use super::SmoothMap;
use crate::jet::Expr;

/// `R^2 -> C^3`, every component `x1 + i x2`. PHWC and harmonic, an
/// immersion, not HWC.
pub fn example1() -> SmoothMap {
    let z = Expr::complex_coordinate(0);
    SmoothMap::new(2, vec![z.clone(), z.clone(), z]).expect("fixture is well formed")
}

/// `R^4 -> C^2`, both components `i (x1 + x2) + x3 + x4`. Linear, PHWC, of
/// complex rank one, not HWC.
pub fn example2() -> SmoothMap {
    let c = Expr::i() * (Expr::var(0) + Expr::var(1)) + Expr::var(2) + Expr::var(3);
    SmoothMap::new(4, vec![c.clone(), c]).expect("fixture is well formed")
}
