//! Sparse stiffness matrix of the piecewise-linear Dirichlet energy.
//!
//! Element matrices are `vol * D^T G^{-1} D` with `G` the simplex Gram matrix
//! and `D` the local difference operator; on triangle meshes this reproduces
//! the cotangent weights. The matrix is symmetric positive semidefinite with
//! the constants in its kernel.

use crate::exec::Exec;
use crate::geometry::{MetricData, SimplicialImmersion};

/// Minimal CSR matrix, enough for matvecs and diagonal extraction.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub num_rows: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.num_rows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.num_rows];
        for r in 0..self.num_rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[k] == r {
                    d[r] = self.values[k];
                }
            }
        }
        d
    }
}

/// Assemble the stiffness matrix for the induced metric.
pub fn assemble_stiffness(imm: &SimplicialImmersion, md: &MetricData, exec: Exec) -> CsrMatrix {
    let n = imm.n();
    let k = n + 1;
    let num_v = imm.num_vertices();
    let num_s = imm.num_simplices();

    // element matrices, computed in parallel, scattered sequentially
    let elems: Vec<[f64; 16]> = exec.map_collect(num_s, |j| {
        let ginv = md.gram_inv(j);
        let vol = md.volume_of(j);
        let mut e = [0.0f64; 16];
        // rows/cols 1..=n are G^{-1}; row/col 0 carries the -sum structure
        let mut row_sums = [0.0f64; 3];
        let mut total = 0.0;
        for a in 0..n {
            for b in 0..n {
                let v = ginv[a * n + b];
                e[(a + 1) * k + (b + 1)] = v * vol;
                row_sums[a] += v;
                total += v;
            }
        }
        for a in 0..n {
            e[(a + 1) * k] = -row_sums[a] * vol;
            e[a + 1] = -row_sums[a] * vol;
        }
        e[0] = total * vol;
        e
    });

    // adjacency: vertex -> sorted neighbor set (including self)
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); num_v];
    for j in 0..num_s {
        let s = imm.simplex(j);
        for &a in s {
            for &b in s {
                nbrs[a].push(b);
            }
        }
    }
    for l in nbrs.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }

    let mut row_ptr = Vec::with_capacity(num_v + 1);
    row_ptr.push(0usize);
    for l in &nbrs {
        row_ptr.push(row_ptr.last().unwrap() + l.len());
    }
    let col_idx: Vec<usize> = nbrs.iter().flatten().copied().collect();
    let mut values = vec![0.0; col_idx.len()];

    let find = |r: usize, c: usize| -> usize {
        let lo = row_ptr[r];
        let hi = row_ptr[r + 1];
        lo + col_idx[lo..hi].binary_search(&c).unwrap()
    };
    for (j, e) in elems.iter().enumerate() {
        let s = imm.simplex(j);
        for a in 0..k {
            for b in 0..k {
                values[find(s[a], s[b])] += e[a * k + b];
            }
        }
    }

    CsrMatrix { num_rows: num_v, row_ptr, col_idx, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_corpus_immersion, induced_metric, Shape};

    #[test]
    fn stiffness_kills_constants_and_is_symmetric() {
        let imm = build_corpus_immersion(&Shape::RoundSphere { radius: 1.0, ambient: 3 }, 2)
            .unwrap();
        let md = induced_metric(&imm).unwrap();
        let kmat = assemble_stiffness(&imm, &md, Exec::default());
        let ones = vec![1.0; imm.num_vertices()];
        let mut out = vec![0.0; imm.num_vertices()];
        kmat.matvec(&ones, &mut out);
        assert!(out.iter().all(|v| v.abs() < 1e-12));

        // spot-check symmetry through quadratic forms
        let u: Vec<f64> = (0..imm.num_vertices()).map(|i| (i as f64 * 0.37).sin()).collect();
        let v: Vec<f64> = (0..imm.num_vertices()).map(|i| (i as f64 * 0.11).cos()).collect();
        let mut ku = vec![0.0; u.len()];
        let mut kv = vec![0.0; v.len()];
        kmat.matvec(&u, &mut ku);
        kmat.matvec(&v, &mut kv);
        let uv: f64 = v.iter().zip(&ku).map(|(a, b)| a * b).sum();
        let vu: f64 = u.iter().zip(&kv).map(|(a, b)| a * b).sum();
        assert!((uv - vu).abs() < 1e-10 * uv.abs().max(1.0));
    }
}
