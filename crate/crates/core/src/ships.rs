//! Reference ship models used by the simulator, tests and the CLI.

use crate::length::beam_rule;
use crate::ship::{Scatterer, ShipModel};

/// Mirror a half-ship template across the x and y axes and center it.
///
/// Mirroring makes the cross-moments ⟨xy⟩, ⟨xz⟩, ⟨yz⟩ vanish, which is the
/// condition under which the covariance model is exact.
pub fn mirrored(half: &[(f64, f64, f64, f64)]) -> ShipModel {
    let mut pts = Vec::new();
    for &(x, y, z, rcs) in half {
        let xs: &[f64] = if x == 0.0 { &[1.0] } else { &[1.0, -1.0] };
        let ys: &[f64] = if y == 0.0 { &[1.0] } else { &[1.0, -1.0] };
        for sx in xs {
            for sy in ys {
                pts.push(Scatterer::new(sx * x, sy * y, z, rcs));
            }
        }
    }
    ShipModel::new(pts).centered()
}

/// A 100 m vessel with 36 scatterers: hull edge, deck fittings and a
/// superstructure block.
pub fn demo_ship() -> ShipModel {
    let half = [
        (50.0, 6.0, 0.0, 2.0),
        (40.0, 8.0, 0.0, 1.5),
        (30.0, 8.0, 2.0, 1.0),
        (20.0, 8.0, 0.0, 1.2),
        (10.0, 8.0, 4.0, 0.8),
        (25.0, 0.0, 18.0, 3.0),
        (45.0, 0.0, 10.0, 1.0),
        (35.0, 4.0, 8.0, 0.7),
        (15.0, 3.0, 12.0, 1.8),
        (5.0, 5.0, 6.0, 0.9),
    ];
    mirrored(&half).with_loa(100.0)
}

/// Rectangular hull of the given length whose beam follows [`beam_rule`],
/// with low superstructure that never sets a range extreme.
pub fn box_ship(length: f64) -> ShipModel {
    let b = 0.5 * beam_rule(length);
    let l = 0.5 * length;
    let mut half = Vec::new();
    for (i, fx) in [1.0, 0.8, 0.6, 0.4, 0.2].iter().enumerate() {
        half.push((fx * l, b, 0.0, 1.0 + 0.25 * i as f64));
    }
    half.push((0.0, b, 0.0, 1.0));
    half.push((0.3 * l, 0.0, 0.06 * length, 2.0));
    half.push((0.1 * l, 0.5 * b, 0.1 * length, 1.5));
    half.push((0.2 * l, 0.3 * b, 0.04 * length, 0.8));
    mirrored(&half).with_loa(length)
}

/// Scatterers evenly spaced along the keel line.
pub fn collinear_ship(length: f64, n: usize) -> ShipModel {
    let pts = (0..n)
        .map(|i| {
            let x = -0.5 * length + length * i as f64 / (n - 1) as f64;
            Scatterer::new(x, 0.0, 0.0, 1.0)
        })
        .collect();
    ShipModel::new(pts).with_loa(length)
}
