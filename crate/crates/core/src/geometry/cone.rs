//! Marching-squares extraction of level sets of `P(phi(x))` in two dimensions.

use std::collections::HashMap;

use super::{deformed_distance, MediumConfig};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Connected piece of a level curve, as an ordered list of points.
pub type Polyline = Vec<[f64; 2]>;

// Grid edges: horizontal (i,j)-(i+1,j) and vertical (i,j)-(i,j+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Level set `P(phi(x)) = level` on a 2-D grid, as polylines.
pub fn cone_level_set(cfg: &MediumConfig, grid: &GridSpec, level: f64) -> Result<Vec<Polyline>> {
    if cfg.dim() != 2 || grid.dim() != 2 {
        return Err(Error::InvalidParameter(format!(
            "level sets need a 2-D configuration and grid, got {} and {}",
            cfg.dim(),
            grid.dim()
        )));
    }
    let (nx, ny) = (grid.samples()[0], grid.samples()[1]);
    let xs = grid.axis(0);
    let ys = grid.axis(1);
    let mut field = vec![0.0; nx * ny];
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..nx {
        for j in 0..ny {
            let v = deformed_distance(cfg, &[xs[i], ys[j]]);
            min = min.min(v);
            max = max.max(v);
            field[i * ny + j] = v - level;
        }
    }
    if !(level >= min && level <= max) {
        return Err(Error::EmptyLevelSet { level, min, max });
    }
    let f = |i: usize, j: usize| field[i * ny + j];
    let point_on = |e: Edge| -> [f64; 2] {
        let ((i0, j0), (i1, j1)) = match e {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (a, b) = (f(i0, j0), f(i1, j1));
        let t = if a == b { 0.5 } else { (a / (a - b)).clamp(0.0, 1.0) };
        [xs[i0] + t * (xs[i1] - xs[i0]), ys[j0] + t * (ys[j1] - ys[j0])]
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            // Corners counter-clockwise from (i,j); bit set when >= level.
            let c = [f(i, j), f(i + 1, j), f(i + 1, j + 1), f(i, j + 1)];
            let mut case = 0u8;
            for (k, v) in c.iter().enumerate() {
                if *v >= 0.0 {
                    case |= 1 << k;
                }
            }
            let bottom = Edge::H(i, j);
            let right = Edge::V(i + 1, j);
            let top = Edge::H(i, j + 1);
            let left = Edge::V(i, j);
            let centre_high = c.iter().sum::<f64>() >= 0.0;
            match case {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((right, top)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((left, top)),
                5 => {
                    if centre_high {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    } else {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    }
                }
                10 => {
                    if centre_high {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    } else {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    // Chain segments through shared edges.
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        by_edge.entry(*a).or_default().push(k);
        by_edge.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let next_from = |edge: Edge, used: &[bool]| -> Option<usize> {
        by_edge.get(&edge)?.iter().copied().find(|&k| !used[k])
    };
    // Start open chains at edges touched once, then sweep closed loops.
    let mut starts: Vec<usize> = (0..segments.len())
        .filter(|&k| by_edge[&segments[k].0].len() == 1 || by_edge[&segments[k].1].len() == 1)
        .collect();
    starts.extend(0..segments.len());
    for start in starts {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let (first, mut tail) = if by_edge[&b].len() == 1 && by_edge[&a].len() != 1 { (b, a) } else { (a, b) };
        let mut edges = vec![first, tail];
        while let Some(k) = next_from(tail, &used) {
            used[k] = true;
            let (a, b) = segments[k];
            tail = if a == tail { b } else { a };
            edges.push(tail);
        }
        let mut line: Polyline = Vec::with_capacity(edges.len());
        for e in edges {
            let p = point_on(e);
            if line.last().is_none_or(|q: &[f64; 2]| q[0] != p[0] || q[1] != p[1]) {
                line.push(p);
            }
        }
        if !line.is_empty() {
            lines.push(line);
        }
    }
    Ok(lines)
}
