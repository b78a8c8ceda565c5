//! Sparse symmetric matrices (upper triangle, compressed columns) with an
//! LDL^T direct factorization and a Jacobi-preconditioned conjugate-gradient
//! solver.
//!
//! The factorization is the up-looking method of Davis' LDL: an elimination
//! tree is built symbolically, then each row of L is obtained by a sparse
//! triangular solve. A fill-reducing permutation is computed from the matrix
//! graph by recursive bisection with breadth-first level-set separators,
//! which keeps the factor size near-optimal for the planar graphs produced
//! by 2D meshes. Symbolic analysis can be reused across refactorizations
//! with the same pattern.

use super::SolveError;

/// Symmetric sparse matrix; only the upper triangle (including the diagonal)
/// is stored, in compressed-column form with row indices sorted per column.
#[derive(Debug, Clone)]
pub struct SparseSym {
    n: usize,
    colptr: Vec<usize>,
    rowidx: Vec<usize>,
    values: Vec<f64>,
}

/// Triplet accumulator for [`SparseSym`]. Entries may be given for either
/// triangle; duplicates are summed.
#[derive(Debug, Clone)]
pub struct SparseSymBuilder {
    n: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl SparseSymBuilder {
    pub fn new(n: usize) -> Self {
        SparseSymBuilder { n, entries: Vec::new() }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((c as u32, r as u32, v));
    }

    pub fn build(mut self) -> SparseSym {
        self.entries.sort_unstable_by_key(|&(c, r, _)| (c, r));
        let mut colptr = vec![0usize; self.n + 1];
        let mut rowidx: Vec<usize> = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(u32, u32)> = None;
        for &(c, r, v) in &self.entries {
            if last == Some((c, r)) {
                *values.last_mut().unwrap() += v;
            } else {
                rowidx.push(r as usize);
                values.push(v);
                colptr[c as usize + 1] += 1;
                last = Some((c, r));
            }
        }
        for c in 0..self.n {
            colptr[c + 1] += colptr[c];
        }
        SparseSym { n: self.n, colptr, rowidx, values }
    }
}

impl SparseSym {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn colptr(&self) -> &[usize] {
        &self.colptr
    }

    pub fn rowidx(&self) -> &[usize] {
        &self.rowidx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Full symmetric matrix-vector product from the upper-triangle storage.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            for p in self.colptr[j]..self.colptr[j + 1] {
                let i = self.rowidx[p];
                let v = self.values[p];
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for j in 0..self.n {
            for p in self.colptr[j]..self.colptr[j + 1] {
                if self.rowidx[p] == j {
                    d[j] = self.values[p];
                }
            }
        }
        d
    }

    /// Adjacency lists of the matrix graph (off-diagonal pattern, both
    /// directions), used by the fill-reducing ordering.
    fn adjacency(&self) -> (Vec<usize>, Vec<usize>) {
        let mut deg = vec![0usize; self.n];
        for j in 0..self.n {
            for p in self.colptr[j]..self.colptr[j + 1] {
                let i = self.rowidx[p];
                if i != j {
                    deg[i] += 1;
                    deg[j] += 1;
                }
            }
        }
        let mut ptr = vec![0usize; self.n + 1];
        for v in 0..self.n {
            ptr[v + 1] = ptr[v] + deg[v];
        }
        let mut adj = vec![0usize; ptr[self.n]];
        let mut fill = ptr.clone();
        for j in 0..self.n {
            for p in self.colptr[j]..self.colptr[j + 1] {
                let i = self.rowidx[p];
                if i != j {
                    adj[fill[i]] = j;
                    fill[i] += 1;
                    adj[fill[j]] = i;
                    fill[j] += 1;
                }
            }
        }
        (ptr, adj)
    }
}

/// Fill-reducing ordering by recursive graph bisection.
///
/// Returns `perm` with `perm[new] = old`.
fn dissection_order(n: usize, ptr: &[usize], adj: &[usize]) -> Vec<usize> {
    const LEAF: usize = 48;
    let mut order = Vec::with_capacity(n);
    let mut stamp = vec![0u32; n];
    let mut level = vec![0u32; n];
    let mut epoch = 0u32;

    // Work stack of node subsets; `true` marks a separator chunk, emitted
    // as-is. Pushing (sep, upper, lower) in that order realizes the
    // dissection recursion: order(lower), order(upper), then the separator.
    let mut work: Vec<(Vec<usize>, bool)> = vec![((0..n).collect(), false)];

    fn bfs(
        start: usize,
        ptr: &[usize],
        adj: &[usize],
        stamp: &mut [u32],
        level: &mut [u32],
        epoch: u32,
    ) -> Vec<usize> {
        // stamp[v] == epoch marks membership; visited nodes get epoch + 1
        let mut queue = vec![start];
        stamp[start] = epoch + 1;
        level[start] = 0;
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for &w in &adj[ptr[v]..ptr[v + 1]] {
                if stamp[w] == epoch {
                    stamp[w] = epoch + 1;
                    level[w] = level[v] + 1;
                    queue.push(w);
                }
            }
        }
        queue
    }

    while let Some((set, is_emit)) = work.pop() {
        if is_emit || set.len() <= LEAF {
            order.extend_from_slice(&set);
            continue;
        }
        epoch += 2;
        for &v in &set {
            stamp[v] = epoch;
        }
        // First sweep: find a far node from an arbitrary start.
        let reached = bfs(set[0], ptr, adj, &mut stamp, &mut level, epoch);
        if reached.len() < set.len() {
            // disconnected: split off this component
            let rest: Vec<usize> = set.iter().copied().filter(|&v| stamp[v] == epoch).collect();
            work.push((rest, false));
            work.push((reached, false));
            continue;
        }
        let far = *reached.last().unwrap();
        // Second sweep from the far node gives the level structure used to cut.
        epoch += 2;
        for &v in &set {
            stamp[v] = epoch;
        }
        let reached = bfs(far, ptr, adj, &mut stamp, &mut level, epoch);
        let depth = level[*reached.last().unwrap()] as usize;
        if depth < 2 {
            order.extend_from_slice(&set);
            continue;
        }
        // Choose the level whose removal splits the set near the middle.
        let mut count = vec![0usize; depth + 1];
        for &v in &set {
            count[level[v] as usize] += 1;
        }
        let mut cut = 1;
        let mut cum = 0;
        for l in 0..depth {
            cum += count[l];
            if cum >= set.len() / 2 {
                cut = l.max(1).min(depth - 1);
                break;
            }
        }
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut sep = Vec::new();
        for &v in &set {
            let l = level[v] as usize;
            if l < cut {
                lower.push(v);
            } else if l == cut {
                sep.push(v);
            } else {
                upper.push(v);
            }
        }
        // LIFO: separator is emitted after both halves are fully processed.
        work.push((sep, true));
        work.push((upper, false));
        work.push((lower, false));
    }
    debug_assert_eq!(order.len(), n);
    order
}

/// Symbolic LDL^T analysis: fill-reducing permutation, permuted pattern,
/// elimination tree and column counts. Reusable across matrices with the
/// same sparsity pattern.
#[derive(Debug, Clone)]
pub struct LdltSymbolic {
    n: usize,
    perm: Vec<usize>,
    ap: Vec<usize>,
    ai: Vec<usize>,
    /// maps entry positions of the original matrix to the permuted pattern
    scatter: Vec<usize>,
    parent: Vec<i64>,
    lp: Vec<usize>,
}

impl LdltSymbolic {
    pub fn analyze(a: &SparseSym) -> Self {
        let (gptr, gadj) = a.adjacency();
        let perm = dissection_order(a.n, &gptr, &gadj);
        Self::analyze_with_perm(a, perm)
    }

    /// Analyze with a caller-provided ordering (`perm[new] = old`).
    pub fn analyze_with_perm(a: &SparseSym, perm: Vec<usize>) -> Self {
        let n = a.n;
        assert_eq!(perm.len(), n);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        // Permuted upper-triangle pattern with a scatter map for fast
        // refactorization.
        let mut count = vec![0usize; n];
        let mut targets = Vec::with_capacity(a.nnz());
        for j in 0..n {
            for p in a.colptr[j]..a.colptr[j + 1] {
                let i = a.rowidx[p];
                let (r, c) = order_pair(iperm[i], iperm[j]);
                targets.push((r, c));
                count[c] += 1;
            }
        }
        let mut ap = vec![0usize; n + 1];
        for c in 0..n {
            ap[c + 1] = ap[c] + count[c];
        }
        // place entries sorted by row within each column
        let mut with_pos: Vec<(usize, usize, usize)> =
            targets.iter().enumerate().map(|(e, &(r, c))| (c, r, e)).collect();
        with_pos.sort_unstable();
        let mut ai = vec![0usize; a.nnz()];
        let mut scatter = vec![0usize; a.nnz()];
        for (q, &(c, r, e)) in with_pos.iter().enumerate() {
            let _ = c;
            ai[q] = r;
            scatter[e] = q;
        }
        // Elimination tree and column counts (symbolic phase of LDL).
        let mut parent = vec![-1i64; n];
        let mut lnz = vec![0usize; n];
        let mut flag = vec![usize::MAX; n];
        for k in 0..n {
            flag[k] = k;
            for p in ap[k]..ap[k + 1] {
                let mut i = ai[p];
                if i < k {
                    while flag[i] != k {
                        if parent[i] == -1 {
                            parent[i] = k as i64;
                        }
                        lnz[i] += 1;
                        flag[i] = k;
                        i = parent[i] as usize;
                    }
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        LdltSymbolic { n, perm, ap, ai, scatter, parent, lp }
    }

    pub fn factor_nnz(&self) -> usize {
        self.lp[self.n]
    }

    /// Numeric factorization of a matrix sharing this symbolic pattern.
    pub fn factor(&self, a: &SparseSym) -> Result<LdltFactor<'_>, SolveError> {
        assert_eq!(a.n, self.n);
        assert_eq!(a.nnz(), self.scatter.len(), "pattern mismatch");
        let n = self.n;
        let mut ax = vec![0.0f64; a.nnz()];
        for (p, &v) in a.values.iter().enumerate() {
            ax[self.scatter[p]] += v;
        }
        let mut li = vec![0usize; self.factor_nnz()];
        let mut lx = vec![0.0f64; self.factor_nnz()];
        let mut d = vec![0.0f64; n];
        let mut y = vec![0.0f64; n];
        let mut lnz = vec![0usize; n];
        let mut flag = vec![usize::MAX; n];
        let mut path = vec![0usize; n];
        let mut stack = vec![0usize; n];
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            for p in self.ap[k]..self.ap[k + 1] {
                let mut i = self.ai[p];
                if i <= k {
                    y[i] += ax[p];
                    let mut len = 0;
                    while flag[i] != k {
                        path[len] = i;
                        len += 1;
                        flag[i] = k;
                        i = self.parent[i] as usize;
                    }
                    while len > 0 {
                        len -= 1;
                        top -= 1;
                        stack[top] = path[len];
                    }
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            for s in top..n {
                let i = stack[s];
                let yi = y[i];
                y[i] = 0.0;
                let p2 = self.lp[i] + lnz[i];
                for p in self.lp[i]..p2 {
                    y[li[p]] -= lx[p] * yi;
                }
                let lki = yi / d[i];
                d[k] -= lki * yi;
                li[p2] = k;
                lx[p2] = lki;
                lnz[i] += 1;
            }
            if d[k].abs() <= 1e-250 {
                return Err(SolveError::Singular { index: k, pivot: d[k] });
            }
        }
        Ok(LdltFactor { sym: self, li, lx, d })
    }
}

#[inline]
fn order_pair(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Numeric LDL^T factors; borrows the symbolic analysis.
#[derive(Debug)]
pub struct LdltFactor<'s> {
    sym: &'s LdltSymbolic,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

impl LdltFactor<'_> {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.sym.n;
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.sym.perm.iter().map(|&old| b[old]).collect();
        for j in 0..n {
            let yj = y[j];
            for p in self.sym.lp[j]..self.sym.lp[j + 1] {
                y[self.li[p]] -= self.lx[p] * yj;
            }
        }
        for j in 0..n {
            y[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let mut s = y[j];
            for p in self.sym.lp[j]..self.sym.lp[j + 1] {
                s -= self.lx[p] * y[self.li[p]];
            }
            y[j] = s;
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.sym.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Direct solve of the symmetric system A x = b via LDL^T.
pub fn ldl_solve(a: &SparseSym, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    let sym = LdltSymbolic::analyze(a);
    let f = sym.factor(a)?;
    Ok(f.solve(b))
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite
/// systems. Stops when the relative residual drops below `tol`.
pub fn cg_solve(a: &SparseSym, b: &[f64], tol: f64, maxit: usize) -> Result<Vec<f64>, SolveError> {
    let n = a.n;
    assert_eq!(b.len(), n);
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let dinv: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..maxit {
        let ap = a.matvec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    Err(SolveError::MaxIterations { maxit, residual: rnorm / bnorm })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SparseSym {
        let mut b = SparseSymBuilder::new(n);
        for i in 0..n {
            b.push(i, i, 2.0);
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn builder_merges_duplicates_and_sorts() {
        let mut b = SparseSymBuilder::new(3);
        b.push(2, 0, 1.5);
        b.push(0, 2, 0.5);
        b.push(1, 1, 3.0);
        b.push(0, 0, 1.0);
        let a = b.build();
        assert_eq!(a.nnz(), 3);
        let x = a.matvec(&[1.0, 1.0, 1.0]);
        assert_eq!(x, vec![3.0, 3.0, 2.0]);
    }

    #[test]
    fn ldl_diagonal_is_elementwise_division() {
        let mut b = SparseSymBuilder::new(4);
        for i in 0..4 {
            b.push(i, i, (i + 1) as f64);
        }
        let a = b.build();
        let x = ldl_solve(&a, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        for i in 0..4 {
            assert!((x[i] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ldl_laplacian_matches_hand_solution() {
        // -u'' = 1 on a 5-point grid: u_i = i(6-i)/2
        let a = laplacian_1d(5);
        let x = ldl_solve(&a, &[1.0; 5]).unwrap();
        let expect = [2.5, 4.0, 4.5, 4.0, 2.5];
        for i in 0..5 {
            assert!((x[i] - expect[i]).abs() < 1e-13, "x = {x:?}");
        }
    }

    #[test]
    fn ldl_zero_pivot_is_singular() {
        let mut b = SparseSymBuilder::new(2);
        b.push(0, 1, 1.0);
        let a = b.build();
        assert!(matches!(ldl_solve(&a, &[1.0, 1.0]), Err(SolveError::Singular { .. })));
    }

    #[test]
    fn ldl_residual_on_2d_grid() {
        // 2D 5-point Laplacian on a 20x20 grid exercises the dissection
        // ordering and the permuted factorization path.
        let m = 20;
        let n = m * m;
        let idx = |i: usize, j: usize| i * m + j;
        let mut b = SparseSymBuilder::new(n);
        for i in 0..m {
            for j in 0..m {
                b.push(idx(i, j), idx(i, j), 4.0);
                if i + 1 < m {
                    b.push(idx(i, j), idx(i + 1, j), -1.0);
                }
                if j + 1 < m {
                    b.push(idx(i, j), idx(i, j + 1), -1.0);
                }
            }
        }
        let a = b.build();
        let rhs: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let x = ldl_solve(&a, &rhs).unwrap();
        let ax = a.matvec(&x);
        let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rnorm =
            ax.iter().zip(&rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(rnorm <= 1e-10 * bnorm, "residual {rnorm:.3e}");
    }

    #[test]
    fn cg_identity_converges_in_one_iteration() {
        let mut b = SparseSymBuilder::new(3);
        for i in 0..3 {
            b.push(i, i, 1.0);
        }
        let a = b.build();
        let x = cg_solve(&a, &[1.0, -2.0, 5.0], 1e-12, 1).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 5.0]);
    }

    #[test]
    fn cg_diagonal_converges_within_n() {
        let n = 12;
        let mut b = SparseSymBuilder::new(n);
        for i in 0..n {
            b.push(i, i, (i + 1) as f64);
        }
        let a = b.build();
        let rhs = vec![1.0; n];
        let x = cg_solve(&a, &rhs, 1e-12, n).unwrap();
        for i in 0..n {
            assert!((x[i] - 1.0 / (i + 1) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn cg_agrees_with_ldl() {
        let a = laplacian_1d(30);
        let rhs: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let tol = 1e-11;
        let xc = cg_solve(&a, &rhs, tol, 1000).unwrap();
        let xd = ldl_solve(&a, &rhs).unwrap();
        let scale = xd.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..30 {
            assert!((xc[i] - xd[i]).abs() <= 10.0 * tol * scale.max(1.0));
        }
    }
}
