//! Built-in fractals with their exact renormalisation constants.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ifs::{AffineMap, BaseConductance, FractalSpec};

/// Names accepted by [`by_name`]; `sg-dim-N` takes any `N >= 2`.
pub const NAMES: [&str; 6] = ["interval", "sg", "sg-dim-N", "sg-level3", "pentagasket5", "pentagasket3"];

pub fn by_name(name: &str) -> Result<FractalSpec> {
    match name {
        "interval" => Ok(interval()),
        "sg" => Ok(sg()),
        "sg-level3" => Ok(sg_level3()),
        "pentagasket5" => Ok(pentagasket5()),
        "pentagasket3" => Ok(pentagasket3()),
        _ => match name.strip_prefix("sg-dim-").and_then(|n| n.parse::<usize>().ok()) {
            Some(n) if n >= 2 => Ok(sg_dim(n)),
            _ => Err(Error::UnknownPreset(name.to_string())),
        },
    }
}

/// One representative of every family, as used by the test suites.
pub fn all() -> Vec<FractalSpec> {
    vec![interval(), sg(), sg_dim(4), sg_level3(), pentagasket5(), pentagasket3()]
}

fn complete_graph(n0: usize, tau: impl Fn(usize, usize) -> f64) -> Vec<BaseConductance> {
    let mut out = Vec::new();
    for a in 0..n0 {
        for b in a + 1..n0 {
            out.push(BaseConductance { edge: [a, b], tau: tau(a, b) });
        }
    }
    out
}

fn finish(mut spec: FractalSpec) -> FractalSpec {
    if let Some(maps) = &spec.maps {
        spec.dim = maps[0].dim();
        spec.fixed_points = Some(maps.iter().map(|f| f.fixed_point()).collect());
    }
    spec
}

/// Unit interval, two halves, `r = 1/2`.
pub fn interval() -> FractalSpec {
    finish(FractalSpec {
        name: Some("interval".into()),
        n_maps: 2,
        dim: 1,
        fixed_points: None,
        maps: Some(vec![AffineMap::homothety(0.5, &[0.0]), AffineMap::homothety(0.5, &[1.0])]),
        boundary: vec![0, 1],
        boundary_corners: None,
        glue: vec![[[0, 1], [1, 0]]],
        renorm: vec![0.5; 2],
        conductances0: complete_graph(2, |_, _| 1.0),
        measure_weights: None,
    })
}

/// Gasket over the vertices of a simplex with `n` corners (`n = 3` is the Sierpinski
/// gasket, `n = 2` the interval); `r = n/(n+2)`.
pub fn sg_dim(n: usize) -> FractalSpec {
    assert!(n >= 2);
    let corners: Vec<Vec<f64>> = if n == 3 {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]]
    } else {
        (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    };
    let mut glue = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            glue.push([[i, j], [j, i]]);
        }
    }
    finish(FractalSpec {
        name: Some(if n == 3 { "sg".into() } else { format!("sg-dim-{n}") }),
        n_maps: n,
        dim: 0,
        fixed_points: None,
        maps: Some(corners.iter().map(|q| AffineMap::homothety(0.5, q)).collect()),
        boundary: (0..n).collect(),
        boundary_corners: None,
        glue,
        renorm: vec![n as f64 / (n as f64 + 2.0); n],
        conductances0: complete_graph(n, |_, _| 1.0),
        measure_weights: None,
    })
}

/// Sierpinski gasket, `r = 3/5`.
pub fn sg() -> FractalSpec {
    sg_dim(3)
}

/// Level-3 Sierpinski gasket: six maps of ratio 1/3, `r = 7/15`.
///
/// Maps 0..3 fix the triangle corners; 3, 4, 5 are the bottom, right and left
/// middle triangles.
pub fn sg_level3() -> FractalSpec {
    let h = 3f64.sqrt();
    let shifts = [
        [0.0, 0.0],
        [2.0 / 3.0, 0.0],
        [1.0 / 3.0, h / 3.0],
        [1.0 / 3.0, 0.0],
        [0.5, h / 6.0],
        [1.0 / 6.0, h / 6.0],
    ];
    let maps = shifts
        .iter()
        .map(|t| AffineMap {
            linear_part: vec![vec![1.0 / 3.0, 0.0], vec![0.0, 1.0 / 3.0]],
            translation: t.to_vec(),
        })
        .collect();
    finish(FractalSpec {
        name: Some("sg-level3".into()),
        n_maps: 6,
        dim: 2,
        fixed_points: None,
        maps: Some(maps),
        boundary: vec![0, 1, 2],
        boundary_corners: None,
        glue: vec![
            [[0, 1], [3, 0]],
            [[3, 1], [1, 0]],
            [[0, 2], [5, 0]],
            [[3, 2], [4, 0]],
            [[4, 0], [5, 1]],
            [[1, 2], [4, 1]],
            [[5, 2], [2, 0]],
            [[4, 2], [2, 1]],
        ],
        renorm: vec![7.0 / 15.0; 6],
        conductances0: complete_graph(3, |_, _| 1.0),
        measure_weights: None,
    })
}

fn pentagon() -> Vec<[f64; 2]> {
    (0..5)
        .map(|k| {
            let t = PI / 2.0 + 2.0 * PI * k as f64 / 5.0;
            [t.cos(), t.sin()]
        })
        .collect()
}

/// Contraction ratio of the pentagasket maps.
fn pentagasket_theta() -> f64 {
    (3.0 - 5f64.sqrt()) / 2.0
}

/// Pentagasket renormalisation factor `(√161 − 9)/8`.
pub fn pentagasket_renorm() -> f64 {
    (161f64.sqrt() - 9.0) / 8.0
}

/// Pentagasket with all five outer corners as boundary.
///
/// Pentagon sides carry `(√161 − 7)/16`, diagonals `(15 − √161)/16`.
pub fn pentagasket5() -> FractalSpec {
    let q = pentagon();
    let theta = pentagasket_theta();
    let s = 161f64.sqrt();
    let side = (s - 7.0) / 16.0;
    let diagonal = (15.0 - s) / 16.0;
    finish(FractalSpec {
        name: Some("pentagasket5".into()),
        n_maps: 5,
        dim: 2,
        fixed_points: None,
        maps: Some(q.iter().map(|p| AffineMap::homothety(theta, p)).collect()),
        boundary: (0..5).collect(),
        boundary_corners: None,
        glue: (0..5).map(|p| [[p, (p + 2) % 5], [(p + 1) % 5, (p + 4) % 5]]).collect(),
        renorm: vec![pentagasket_renorm(); 5],
        conductances0: complete_graph(5, |a, b| if matches!((b - a) % 5, 1 | 4) { side } else { diagonal }),
        measure_weights: None,
    })
}

/// Pentagasket with three boundary points: the apex `q_0` and the base corners
/// `q_2`, `q_3`.
///
/// The maps are the apex contraction followed by rotations about the centre, so the
/// base corners are images of the apex (`F_2(q_0)`, `F_3(q_0)`) rather than fixed points.
pub fn pentagasket3() -> FractalSpec {
    let theta = pentagasket_theta();
    let apex = pentagon()[0];
    let s = 161f64.sqrt();
    let base = (s - 7.0) / 14.0;
    let leg = (21.0 - s) / 28.0;
    let maps = (0..5)
        .map(|p| {
            let rot = AffineMap::planar(1.0, 2.0 * PI * p as f64 / 5.0, [0.0, 0.0], [0.0, 0.0]);
            rot.compose(&AffineMap::homothety(theta, &apex))
        })
        .collect();
    finish(FractalSpec {
        name: Some("pentagasket3".into()),
        n_maps: 5,
        dim: 2,
        fixed_points: None,
        maps: Some(maps),
        boundary: vec![0, 2, 3],
        boundary_corners: Some(vec![0, 0, 0]),
        glue: (0..5).map(|p| [[p, 1], [(p + 1) % 5, 2]]).collect(),
        renorm: vec![pentagasket_renorm(); 5],
        conductances0: vec![
            BaseConductance { edge: [0, 1], tau: leg },
            BaseConductance { edge: [0, 2], tau: leg },
            BaseConductance { edge: [1, 2], tau: base },
        ],
        measure_weights: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{build_graph, validate_spec};

    #[test]
    fn names_resolve() {
        for name in ["interval", "sg", "sg-dim-4", "sg-level3", "pentagasket5", "pentagasket3"] {
            let spec = by_name(name).unwrap();
            validate_spec(&spec).unwrap();
        }
        assert_eq!(by_name("sg-dim-1"), Err(Error::UnknownPreset("sg-dim-1".into())));
        assert_eq!(by_name("koch"), Err(Error::UnknownPreset("koch".into())));
    }

    #[test]
    fn pentagasket_constant() {
        assert!((pentagasket_renorm() - 0.461).abs() < 1e-3);
    }

    #[test]
    fn pentagasket5_generation_two() {
        assert_eq!(build_graph(&pentagasket5(), 2).n_vertices(), 95);
    }

    #[test]
    fn pentagasket3_boundary_is_a_triangle() {
        let spec = pentagasket3();
        let x = crate::ifs::boundary_coordinates(&spec).unwrap();
        let q = pentagon();
        for (p, k) in [(0, 0), (1, 2), (2, 3)] {
            assert!((x[p][0] - q[k][0]).abs() < 1e-14 && (x[p][1] - q[k][1]).abs() < 1e-14);
        }
    }
}
