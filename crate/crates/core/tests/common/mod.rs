#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use circlet::filtration::{build_rips, RipsFiltration};
use circlet::metric::{DistanceMatrix, DistanceSource, PointCloud};
use circlet::rng::SeededRng;

/// Random planar points (even seeds) or a random weighted-graph shortest-path
/// metric (odd seeds), with `n` in `4..=10`.
pub fn random_space(seed: u64) -> DistanceMatrix {
    let mut rng = SeededRng::new(seed);
    let n = 4 + rng.below(7) as usize;
    if seed.is_multiple_of(2) {
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.uniform(), rng.uniform()]).collect();
        let src = DistanceSource::Cloud(PointCloud::from_rows(pts).unwrap());
        DistanceMatrix::from_fn(n, |i, j| src.between(i, j))
    } else {
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for i in 0..n {
            for j in i + 1..n {
                let w = 0.1 + rng.uniform();
                d[i][j] = w;
                d[j][i] = w;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        DistanceMatrix::from_rows(d).unwrap()
    }
}

/// Full 2-skeleton of the Rips complex.
pub fn full_rips(m: &DistanceMatrix) -> RipsFiltration {
    build_rips(m, m.diameter().next_up(), 2).unwrap()
}

/// Rank of a dense matrix over `Z/q` by Gaussian elimination.
pub fn rank_mod(mut rows: Vec<Vec<u64>>, q: u64) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_multiple_of(q)) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = pow_mod(rows[rank][c], q - 2, q);
        for v in rows[rank].iter_mut() {
            *v = *v * inv % q;
        }
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[c] % q != 0 {
                let f = row[c];
                for (v, pv) in row.iter_mut().zip(&pivot) {
                    *v = (*v + q * q - f * pv % q) % q;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow_mod(mut b: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1;
    b %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % q;
        }
        b = b * b % q;
        e >>= 1;
    }
    acc
}

/// Diagram of the Rips filtration from persistent Betti numbers, each a
/// difference of boundary-matrix ranks over `Z/q`. Keys match
/// `circlet::cohomology::diagram_multiset`.
pub fn rank_oracle_diagram(filt: &RipsFiltration, q: u64) -> HashMap<(u8, u64, Option<u64>), usize> {
    let n = filt.vertex_count();
    let edges = filt.edges();
    let tris = filt.triangles();
    let index = filt.edge_index();

    let mut values: Vec<f64> = std::iter::once(0.0)
        .chain(edges.iter().map(|e| e.diameter))
        .chain(tris.iter().map(|t| t.diameter))
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let last = values.len() - 1;

    let edges_at = |v: f64| edges.iter().filter(|e| e.diameter <= v).count();
    let tris_at = |v: f64| tris.iter().filter(|t| t.diameter <= v).count();

    // ∂1 restricted to the first `k` edges: rows are edges, columns vertices
    let d1 = |k: usize| -> Vec<Vec<u64>> {
        edges[..k]
            .iter()
            .map(|e| {
                let mut row = vec![0; n];
                row[e.i as usize] = q - 1;
                row[e.j as usize] = 1;
                row
            })
            .collect()
    };
    // ∂2 on the first `k` triangles, columns restricted to `cols` (edge indices)
    let d2 = |k: usize, cols: &[usize]| -> Vec<Vec<u64>> {
        tris[..k]
            .iter()
            .map(|t| {
                let mut row = vec![0; cols.len()];
                let [ab, ac, bc] = t.faces();
                for (face, coef) in [(ab, 1), (ac, q - 1), (bc, 1)] {
                    let e = index[&face];
                    if let Some(c) = cols.iter().position(|&x| x == e) {
                        row[c] = coef;
                    }
                }
                row
            })
            .collect()
    };
    let all_edges: Vec<usize> = (0..edges.len()).collect();

    let rank_d1: Vec<usize> = values.iter().map(|&v| rank_mod(d1(edges_at(v)), q)).collect();
    let rank_d2: Vec<usize> = values.iter().map(|&v| rank_mod(d2(tris_at(v), &all_edges), q)).collect();

    let beta0 = |_i: usize, j: usize| n - rank_d1[j];
    let beta1 = |i: usize, j: usize| {
        let ei = edges_at(values[i]);
        let cycles = ei - rank_d1[i];
        let outside: Vec<usize> = (ei..edges.len()).collect();
        let boundaries_inside = rank_d2[j] - rank_mod(d2(tris_at(values[j]), &outside), q);
        cycles - boundaries_inside
    };

    let mut out = HashMap::new();
    for dim in [0u8, 1] {
        let beta = |i: isize, j: usize| -> isize {
            if i < 0 {
                return 0;
            }
            (if dim == 0 { beta0(i as usize, j) } else { beta1(i as usize, j) }) as isize
        };
        for i in 0..=last {
            for j in i + 1..=last {
                let mu = beta(i as isize, j - 1) - beta(i as isize, j) - beta(i as isize - 1, j - 1)
                    + beta(i as isize - 1, j);
                assert!(mu >= 0, "negative multiplicity");
                if mu > 0 {
                    out.insert((dim, values[i].to_bits(), Some(values[j].to_bits())), mu as usize);
                }
            }
            let mu = beta(i as isize, last) - beta(i as isize - 1, last);
            if mu > 0 {
                out.insert((dim, values[i].to_bits(), None), mu as usize);
            }
        }
    }
    out
}

/// Regular hexagon with unit side on the unit circle.
pub fn hexagon() -> DistanceMatrix {
    let pts: Vec<Vec<f64>> = (0..6)
        .map(|k| {
            let a = k as f64 * std::f64::consts::PI / 3.0;
            vec![a.cos(), a.sin()]
        })
        .collect();
    let src = DistanceSource::Cloud(PointCloud::from_rows(pts).unwrap());
    DistanceMatrix::from_fn(6, |i, j| src.between(i, j))
}

/// Number of turns of `angles` along a closed loop visited in order.
pub fn winding(angles: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in 0..angles.len() {
        let next = angles[(k + 1) % angles.len()];
        total += circlet::coords::wrap_angle(next - angles[k]);
    }
    total / std::f64::consts::TAU
}

/// Largest step between consecutive samples, measured on the circle.
pub fn max_jump(angles: &[f64]) -> f64 {
    angles
        .windows(2)
        .map(|w| circlet::coords::wrap_angle(w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}

/// Distance between two angles on the circle.
pub fn circle_gap(a: f64, b: f64) -> f64 {
    circlet::coords::wrap_angle(a - b).abs()
}
