//! Marching-squares extraction of level sets on a regular grid.

use std::collections::HashMap;

use crate::exec::Exec;

/// Regular sampling grid over `[x_min, x_max] × [p_min, p_max]` with `nx × np`
/// nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl GridSpec {
    pub fn square(half_x: f64, half_p: f64, nodes: usize) -> Self {
        Self {
            x_min: -half_x,
            x_max: half_x,
            p_min: -half_p,
            p_max: half_p,
            nx: nodes,
            np: nodes,
        }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dp()
    }

    /// Samples `f` on every node, row-major with `p` as the slow index.
    pub fn sample<F>(&self, exec: Exec, f: F) -> Vec<f64>
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        let rows = exec.map(self.np, |j| {
            let p = self.p(j);
            (0..self.nx).map(|i| f(self.x(i), p)).collect::<Vec<_>>()
        });
        rows.concat()
    }
}

/// One connected piece of a level set.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

impl Polyline {
    /// Shoelace area, positive for counter-clockwise loops.
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        if n < 3 {
            return 0.0;
        }
        let mut s = 0.0;
        for k in 0..n {
            let [x0, y0] = self.points[k];
            let [x1, y1] = self.points[(k + 1) % n];
            s += x0 * y1 - x1 * y0;
        }
        0.5 * s
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.points.len().max(1) as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
        [sx / n, sy / n]
    }
}

#[derive(Clone, Copy)]
enum Edge {
    Bottom,
    Right,
    Top,
    Left,
}

/// Extracts the `level` set of `values` sampled on `grid`.
///
/// Cells whose diagonal corners agree but disagree with the other diagonal
/// are resolved by the cell-centre average. Output order depends only on the
/// input, never on hashing.
pub fn marching_squares(values: &[f64], grid: &GridSpec, level: f64) -> Vec<Polyline> {
    let (nx, np) = (grid.nx, grid.np);
    assert_eq!(values.len(), nx * np, "grid and sample count disagree");
    let v = |i: usize, j: usize| values[j * nx + i];
    let edge_key = |i: usize, j: usize, e: Edge| -> usize {
        match e {
            Edge::Bottom => 2 * (j * nx + i),
            Edge::Top => 2 * ((j + 1) * nx + i),
            Edge::Left => 2 * (j * nx + i) + 1,
            Edge::Right => 2 * (j * nx + i + 1) + 1,
        }
    };

    let mut segments: Vec<[usize; 2]> = Vec::new();
    for j in 0..np - 1 {
        for i in 0..nx - 1 {
            let (a, b, c, d) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
            let case = (a > level) as u8
                | ((b > level) as u8) << 1
                | ((c > level) as u8) << 2
                | ((d > level) as u8) << 3;
            use Edge::*;
            let pairs: &[(Edge, Edge)] = match case {
                0 | 15 => &[],
                1 | 14 => &[(Left, Bottom)],
                2 | 13 => &[(Bottom, Right)],
                3 | 12 => &[(Left, Right)],
                4 | 11 => &[(Right, Top)],
                6 | 9 => &[(Bottom, Top)],
                7 | 8 => &[(Left, Top)],
                5 | 10 => {
                    let centre_above = 0.25 * (a + b + c + d) > level;
                    // case 5: a and c above; joined through the centre when it
                    // is above too, which separates b and d
                    let joined = (case == 5) == centre_above;
                    if joined {
                        &[(Left, Top), (Bottom, Right)]
                    } else {
                        &[(Left, Bottom), (Right, Top)]
                    }
                }
                _ => unreachable!(),
            };
            for &(e0, e1) in pairs {
                segments.push([edge_key(i, j, e0), edge_key(i, j, e1)]);
            }
        }
    }

    let point_of = |key: usize| -> [f64; 2] {
        let node = key / 2;
        let (i, j) = (node % nx, node / nx);
        let (i2, j2) = if key.is_multiple_of(2) { (i + 1, j) } else { (i, j + 1) };
        let (va, vb) = (v(i, j), v(i2, j2));
        let t = (level - va) / (vb - va);
        let (xa, pa) = (grid.x(i), grid.p(j));
        let (xb, pb) = (grid.x(i2), grid.p(j2));
        [xa + t * (xb - xa), pa + t * (pb - pa)]
    };

    let mut incident: HashMap<usize, Vec<usize>> = HashMap::with_capacity(2 * segments.len());
    for (s, seg) in segments.iter().enumerate() {
        for &k in seg {
            incident.entry(k).or_default().push(s);
        }
    }

    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let walk = |start_seg: usize, start_key: usize, used: &mut [bool]| -> (Vec<usize>, bool) {
        let mut keys = vec![start_key];
        let mut seg = start_seg;
        let mut key = start_key;
        loop {
            used[seg] = true;
            let [k0, k1] = segments[seg];
            let next_key = if k0 == key { k1 } else { k0 };
            if next_key == start_key {
                return (keys, true);
            }
            keys.push(next_key);
            key = next_key;
            match incident[&key].iter().copied().find(|&s| !used[s]) {
                Some(s) => seg = s,
                None => return (keys, false),
            }
        }
    };

    // open pieces first, starting from their dangling ends
    for s in 0..segments.len() {
        if used[s] {
            continue;
        }
        for &k in &segments[s] {
            if incident[&k].len() == 1 && !used[s] {
                let (keys, _) = walk(s, k, &mut used);
                lines.push(Polyline {
                    points: keys.into_iter().map(point_of).collect(),
                    closed: false,
                });
            }
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            let (keys, closed) = walk(s, segments[s][0], &mut used);
            lines.push(Polyline {
                points: keys.into_iter().map(point_of).collect(),
                closed,
            });
        }
    }
    lines
}
