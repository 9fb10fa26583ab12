use crate::molgraph::{edge_weight, EdgeLabel, MolecularGraph, VertexLabel};

use super::{edge_kernel, KernelError, KernelHyperparameters, Solver, DENSE_LIMIT};

#[derive(Debug, Clone, Copy)]
struct Step {
    to: usize,
    weight: f64,
    edge: usize,
}

/// A graph with adjacency weights evaluated for one `zeta`, ready for
/// repeated kernel evaluations.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    vertices: Vec<VertexLabel>,
    edges: Vec<EdgeLabel>,
    steps: Vec<Vec<Step>>,
    degree: Vec<f64>,
}

impl PreparedGraph {
    pub fn new(graph: &MolecularGraph, hyper: &KernelHyperparameters) -> Self {
        let n = graph.n_vertices();
        let mut steps = vec![Vec::new(); n];
        for (k, e) in graph.edges().iter().enumerate() {
            let w = edge_weight(e.label.length, e.sigma, hyper.zeta, hyper.adjacency);
            steps[e.i].push(Step { to: e.j, weight: w, edge: k });
            steps[e.j].push(Step { to: e.i, weight: w, edge: k });
        }
        let degree = steps
            .iter()
            .map(|s| s.iter().map(|st| st.weight).sum())
            .collect();
        PreparedGraph {
            vertices: graph.vertices().to_vec(),
            edges: graph.edges().iter().map(|e| e.label).collect(),
            steps,
            degree,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }
}

pub(crate) fn self_kernel(g: &PreparedGraph, hyper: &KernelHyperparameters) -> Result<f64, KernelError> {
    evaluate(g, g, hyper)
}

/// Pairwise microkernel tables for one graph pair.
struct Product<'a> {
    a: &'a PreparedGraph,
    b: &'a PreparedGraph,
    /// `K_v(i, j)` at `i * nb + j`.
    vertex: Vec<f64>,
    /// `K_e(e, f)` at `e * mb + f`.
    edge: Vec<f64>,
}

impl<'a> Product<'a> {
    fn new(a: &'a PreparedGraph, b: &'a PreparedGraph, hyper: &KernelHyperparameters) -> Self {
        let vertex = a
            .vertices
            .iter()
            .flat_map(|va| b.vertices.iter().map(move |vb| if va == vb { 1.0 } else { hyper.nu }))
            .collect();
        let edge = a
            .edges
            .iter()
            .flat_map(|ea| {
                b.edges
                    .iter()
                    .map(move |eb| edge_kernel(ea, eb, hyper.lambda, hyper.edge_mismatch))
            })
            .collect();
        Product { a, b, vertex, edge }
    }

    fn size(&self) -> usize {
        self.a.n_vertices() * self.b.n_vertices()
    }

    fn start_sum(&self, r: &[f64]) -> f64 {
        let s: f64 = self.vertex.iter().zip(r).map(|(v, r)| v * r).sum();
        s / self.size() as f64
    }
}

/// Unnormalized kernel between two prepared graphs.
pub(crate) fn evaluate(
    a: &PreparedGraph,
    b: &PreparedGraph,
    hyper: &KernelHyperparameters,
) -> Result<f64, KernelError> {
    let product = Product::new(a, b, hyper);
    let q2 = hyper.q * hyper.q;
    if a.edges.is_empty() || b.edges.is_empty() {
        // one side cannot move: every walk pair has length 1
        return Ok(product.start_sum(&vec![q2; product.size()]));
    }
    let r = match hyper.solver {
        Solver::Dense => solve_dense(&product, hyper)?,
        Solver::FixedPoint => solve_fixed_point(&product, hyper)?,
        Solver::ConjugateGradient => solve_cg(&product, hyper)?,
        Solver::Auto if product.size() <= DENSE_LIMIT => solve_dense(&product, hyper)?,
        Solver::Auto => solve_cg(&product, hyper)?,
    };
    Ok(product.start_sum(&r))
}

/// Solves `(V D - c V W V) r = V D b`, the symmetric positive definite form of
/// `(I - c D^-1 W V) r = b` with `c = (1-q)^2`, `D = diag(d_i d'_j)` and
/// `W[(i,j),(k,l)] = A_ik A'_jl K_e(e_ik, e'_jl)`.
fn solve_dense(p: &Product, hyper: &KernelHyperparameters) -> Result<Vec<f64>, KernelError> {
    let nb = p.b.n_vertices();
    let mb = p.b.edges.len();
    let size = p.size();
    let c = (1.0 - hyper.q).powi(2);
    let q2 = hyper.q * hyper.q;
    let mut s = vec![0.0; size * size];
    let mut rhs = vec![0.0; size];
    for (i, steps_i) in p.a.steps.iter().enumerate() {
        for (j, steps_j) in p.b.steps.iter().enumerate() {
            let row = i * nb + j;
            let vij = p.vertex[row];
            let diag = vij * p.a.degree[i] * p.b.degree[j];
            rhs[row] = diag * q2;
            let s_row = &mut s[row * size..(row + 1) * size];
            s_row[row] = diag;
            for sk in steps_i {
                for sl in steps_j {
                    let col = sk.to * nb + sl.to;
                    s_row[col] -= c
                        * vij
                        * sk.weight
                        * sl.weight
                        * p.edge[sk.edge * mb + sl.edge]
                        * p.vertex[col];
                }
            }
        }
    }
    cholesky_in_place(&mut s, size)?;
    cholesky_solve(&s, size, &mut rhs);
    Ok(rhs)
}

/// Lower Cholesky factor of a row-major SPD matrix, written over its lower
/// triangle.
pub(crate) fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<(), KernelError> {
    for j in 0..n {
        let (done, rest) = a.split_at_mut(j * n);
        let row_j = &mut rest[..n];
        for k in 0..j {
            let row_k = &done[k * n..k * n + n];
            let dot = dot(&row_j[..k], &row_k[..k]);
            row_j[k] = (row_j[k] - dot) / row_k[k];
        }
        let d = row_j[j] - dot(&row_j[..j], &row_j[..j]);
        if !(d > 0.0) {
            return Err(KernelError::SingularSystem);
        }
        row_j[j] = d.sqrt();
    }
    Ok(())
}

fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        b[i] = (b[i] - dot(row, &b[..i])) / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut x = b[i];
        for k in i + 1..n {
            x -= l[k * n + i] * b[k];
        }
        b[i] = x / l[i * n + i];
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorize without -ffast-math
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut tail = 0.0;
    for i in chunks * 4..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Iterates `r <- b + M r` until the update is below `tolerance * max|r|`.
/// Converges because every row of `M` sums to at most `(1-q)^2`.
fn solve_fixed_point(p: &Product, hyper: &KernelHyperparameters) -> Result<Vec<f64>, KernelError> {
    let nb = p.b.n_vertices();
    let mb = p.b.edges.len();
    let size = p.size();
    let c = (1.0 - hyper.q).powi(2);
    let q2 = hyper.q * hyper.q;
    let mut r = vec![q2; size];
    let mut next = vec![0.0; size];
    // scaled source: V_kl r_kl
    let mut vr = vec![0.0; size];
    for _ in 0..hyper.max_iterations {
        for (x, (v, r)) in vr.iter_mut().zip(p.vertex.iter().zip(&r)) {
            *x = v * r;
        }
        let mut delta: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for (i, steps_i) in p.a.steps.iter().enumerate() {
            for (j, steps_j) in p.b.steps.iter().enumerate() {
                let mut acc = 0.0;
                for sk in steps_i {
                    let row = sk.to * nb;
                    let ebase = sk.edge * mb;
                    for sl in steps_j {
                        acc += sk.weight * sl.weight * p.edge[ebase + sl.edge] * vr[row + sl.to];
                    }
                }
                let idx = i * nb + j;
                let value = q2 + c * acc / (p.a.degree[i] * p.b.degree[j]);
                delta = delta.max((value - r[idx]).abs());
                scale = scale.max(value.abs());
                next[idx] = value;
            }
        }
        std::mem::swap(&mut r, &mut next);
        if delta <= hyper.tolerance * scale {
            return Ok(r);
        }
    }
    Err(KernelError::FixedPointDivergence {
        iterations: hyper.max_iterations,
    })
}

/// `W y` with `W[(i,j),(k,l)] = A_ik A'_jl K_e(e_ik, e'_jl)`.
fn apply_w(p: &Product, y: &[f64], out: &mut [f64]) {
    let nb = p.b.n_vertices();
    let mb = p.b.edges.len();
    for (i, steps_i) in p.a.steps.iter().enumerate() {
        for (j, steps_j) in p.b.steps.iter().enumerate() {
            let mut acc = 0.0;
            for sk in steps_i {
                let row = sk.to * nb;
                let ebase = sk.edge * mb;
                for sl in steps_j {
                    acc += sk.weight * sl.weight * p.edge[ebase + sl.edge] * y[row + sl.to];
                }
            }
            out[i * nb + j] = acc;
        }
    }
}

/// Jacobi-preconditioned conjugate gradients on the same symmetric positive
/// definite system as [`solve_dense`], applying `W` as an operator. Stops when
/// the residual norm falls below `tolerance` times the right-hand side norm.
fn solve_cg(p: &Product, hyper: &KernelHyperparameters) -> Result<Vec<f64>, KernelError> {
    let nb = p.b.n_vertices();
    let size = p.size();
    let c = (1.0 - hyper.q).powi(2);
    let q2 = hyper.q * hyper.q;
    // diagonal of the system, V D
    let diag: Vec<f64> = (0..size)
        .map(|idx| p.vertex[idx] * p.a.degree[idx / nb] * p.b.degree[idx % nb])
        .collect();
    let apply = |x: &[f64], vx: &mut [f64], wvx: &mut [f64], out: &mut [f64]| {
        for ((v, x), o) in vx.iter_mut().zip(x).zip(p.vertex.iter()) {
            *v = o * x;
        }
        apply_w(p, vx, wvx);
        for idx in 0..size {
            out[idx] = diag[idx] * x[idx] - c * p.vertex[idx] * wvx[idx];
        }
    };
    let rhs: Vec<f64> = diag.iter().map(|d| d * q2).collect();
    let rhs_norm = dot(&rhs, &rhs).sqrt();
    // the unpreconditioned fixed point r = q^2 is a good start
    let mut x = vec![q2; size];
    let (mut vx, mut wvx, mut ap) = (vec![0.0; size], vec![0.0; size], vec![0.0; size]);
    apply(&x, &mut vx, &mut wvx, &mut ap);
    let mut r: Vec<f64> = rhs.iter().zip(&ap).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut dir = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..hyper.max_iterations {
        if dot(&r, &r).sqrt() <= hyper.tolerance * rhs_norm {
            return Ok(x);
        }
        apply(&dir, &mut vx, &mut wvx, &mut ap);
        let curvature = dot(&dir, &ap);
        if !(curvature > 0.0) {
            return Err(KernelError::SingularSystem);
        }
        let step = rz / curvature;
        for idx in 0..size {
            x[idx] += step * dir[idx];
            r[idx] -= step * ap[idx];
            z[idx] = r[idx] / diag[idx];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for idx in 0..size {
            dir[idx] = z[idx] + beta * dir[idx];
        }
    }
    Err(KernelError::FixedPointDivergence {
        iterations: hyper.max_iterations,
    })
}
