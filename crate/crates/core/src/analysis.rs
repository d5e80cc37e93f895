//! Distance-geometry and clustering analytics: classical multidimensional
//! scaling, silhouette scoring, matrix error reports, and autocorrelogram
//! peak counting for eigenmap periodicity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Mat;

/// 2D projection of a point set, centered at the origin, axes ordered by
/// the eigenvalue mass they capture.
#[derive(Debug, Clone, Serialize)]
pub struct Embedding2D {
    pub coords: Vec<(f64, f64)>,
    pub labels: Option<Vec<usize>>,
    /// Fraction of the positive eigenvalue mass captured by the two axes.
    pub captured_mass: f64,
    pub axis_eigenvalues: (f64, f64),
}

impl Embedding2D {
    pub fn with_labels(mut self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.coords.len() {
            return Err(Error::Shape(format!(
                "{} labels for {} points",
                labels.len(),
                self.coords.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

fn euclidean_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Gram matrix from squared distances: B = -1/2 J D2 J with the centering
/// matrix J = I - 11^T/n. Rows and columns of B sum to zero.
fn double_center(d2: &Mat) -> Mat {
    let n = d2.rows();
    let row_means: Vec<f64> = (0..n)
        .map(|i| d2.row(i).iter().sum::<f64>() / n as f64)
        .collect();
    let grand_mean: f64 = row_means.iter().sum::<f64>() / n as f64;
    let mut b = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = -0.5 * (d2[(i, j)] - row_means[i] - row_means[j] + grand_mean);
        }
    }
    b
}

/// Classical (Torgerson) MDS to two dimensions: square the Euclidean
/// distance matrix, double-center it, eigendecompose, and scale the top two
/// eigenvectors by the square roots of their eigenvalues. Axes whose
/// eigenvalue is not positive are omitted (left at zero).
pub fn classical_mds(points: &[Vec<f64>]) -> Result<Embedding2D> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Input("MDS needs at least two points".into()));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Input("points have unequal dimensions".into()));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input("points must have finite coordinates".into()));
    }

    let mut d2 = Mat::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean_sq(&points[i], &points[j]);
            d2[(i, j)] = d;
            d2[(j, i)] = d;
        }
    }
    let b = double_center(&d2);

    let dec = crate::spectral::jacobi_eigen(&b, crate::spectral::DEFAULT_JACOBI_TOL)?;
    let eigs = dec.eigenvalues();
    let positive_mass: f64 = eigs.iter().filter(|&&l| l > 0.0).sum();

    let axis = |k: usize| -> (f64, Vec<f64>) {
        let l = eigs[k];
        if l > 0.0 {
            let v = dec.eigenvector(k);
            (l, v.iter().map(|&x| x * l.sqrt()).collect())
        } else {
            (l.max(0.0), vec![0.0; n])
        }
    };
    let (l1, xs) = axis(0);
    let (l2, ys) = axis(1);
    let captured = if positive_mass > 0.0 {
        (l1 + l2) / positive_mass
    } else {
        0.0
    };

    Ok(Embedding2D {
        coords: xs.into_iter().zip(ys).collect(),
        labels: None,
        captured_mass: captured,
        axis_eigenvalues: (l1, l2),
    })
}

/// Stress-based metric MDS: classical initialization followed by Guttman
/// majorization steps toward the full pairwise distance matrix. Unlike the
/// bare top-2 spectral projection, this keeps within-cluster spread that
/// lives outside the two leading axes, which is what the usual MDS plotting
/// tools show. A tiny index-keyed jitter breaks exact symmetries in the
/// initialization so that coincident points with nonzero target distances
/// can separate; the procedure stays deterministic.
pub fn stress_mds(points: &[Vec<f64>], max_iters: usize) -> Result<Embedding2D> {
    let init = classical_mds(points)?;
    let n = points.len();
    let mut delta = Mat::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean_sq(&points[i], &points[j]).sqrt();
            delta[(i, j)] = d;
            delta[(j, i)] = d;
        }
    }
    let mut x: Vec<(f64, f64)> = init
        .coords
        .iter()
        .enumerate()
        .map(|(i, &(px, py))| {
            let t = i as f64;
            (px + 1e-8 * t.sin(), py + 1e-8 * t.cos())
        })
        .collect();

    let stress = |x: &[(f64, f64)]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = ((x[i].0 - x[j].0).powi(2) + (x[i].1 - x[j].1).powi(2)).sqrt();
                s += (delta[(i, j)] - d).powi(2);
            }
        }
        s
    };

    let mut prev = stress(&x);
    for _ in 0..max_iters {
        // Guttman transform: X <- B(X) X / n
        let mut next = vec![(0.0f64, 0.0f64); n];
        for i in 0..n {
            let (mut bx, mut by) = (0.0, 0.0);
            let mut bii = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = ((x[i].0 - x[j].0).powi(2) + (x[i].1 - x[j].1).powi(2)).sqrt();
                if d > 0.0 {
                    let b = -delta[(i, j)] / d;
                    bx += b * x[j].0;
                    by += b * x[j].1;
                    bii -= b;
                }
            }
            next[i] = (
                (bii * x[i].0 + bx) / n as f64,
                (bii * x[i].1 + by) / n as f64,
            );
        }
        x = next;
        let s = stress(&x);
        if (prev - s).abs() < 1e-14 * prev.max(1.0) {
            break;
        }
        prev = s;
    }

    // re-center and rotate to principal axes with a fixed sign convention
    let (cx, cy) = x
        .iter()
        .fold((0.0, 0.0), |(ax, ay), &(px, py)| (ax + px, ay + py));
    let (cx, cy) = (cx / n as f64, cy / n as f64);
    for p in &mut x {
        p.0 -= cx;
        p.1 -= cy;
    }
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(px, py) in &x {
        sxx += px * px;
        syy += py * py;
        sxy += px * py;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (c, s) = (theta.cos(), theta.sin());
    let mut coords: Vec<(f64, f64)> = x
        .iter()
        .map(|&(px, py)| (c * px + s * py, -s * px + c * py))
        .collect();
    let var = |axis: usize| -> f64 {
        coords
            .iter()
            .map(|p| if axis == 0 { p.0 * p.0 } else { p.1 * p.1 })
            .sum()
    };
    if var(1) > var(0) {
        for p in &mut coords {
            *p = (p.1, p.0);
        }
    }
    for axis in 0..2 {
        let extreme = coords
            .iter()
            .map(|p| if axis == 0 { p.0 } else { p.1 })
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if extreme < 0.0 {
            for p in &mut coords {
                if axis == 0 {
                    p.0 = -p.0;
                } else {
                    p.1 = -p.1;
                }
            }
        }
    }

    Ok(Embedding2D {
        coords,
        labels: None,
        captured_mass: init.captured_mass,
        axis_eigenvalues: init.axis_eigenvalues,
    })
}

/// Default iteration budget for [`stress_mds`].
pub const STRESS_MDS_ITERS: usize = 500;

/// Per-point silhouette values over 2D Euclidean distances. Points in
/// singleton clusters score 0; coincident clusters (a = b = 0) score 0.
pub fn silhouette_samples(embedding: &Embedding2D) -> Result<Vec<f64>> {
    let labels = embedding
        .labels
        .as_ref()
        .ok_or_else(|| Error::UndefinedClustering("embedding has no labels".into()))?;
    let n = embedding.coords.len();
    let mut distinct: Vec<usize> = labels.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::UndefinedClustering(
            "silhouette needs at least two distinct labels".into(),
        ));
    }
    let dist = |i: usize, j: usize| -> f64 {
        let (xi, yi) = embedding.coords[i];
        let (xj, yj) = embedding.coords[j];
        ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt()
    };
    let mut scores = Vec::with_capacity(n);
    for i in 0..n {
        let own = labels[i];
        let own_size = labels.iter().filter(|&&l| l == own).count();
        if own_size == 1 {
            scores.push(0.0);
            continue;
        }
        let mut a = 0.0;
        for j in 0..n {
            if j != i && labels[j] == own {
                a += dist(i, j);
            }
        }
        a /= (own_size - 1) as f64;

        let mut b = f64::INFINITY;
        for &other in &distinct {
            if other == own {
                continue;
            }
            let mut total = 0.0;
            let mut count = 0usize;
            for j in 0..n {
                if labels[j] == other {
                    total += dist(i, j);
                    count += 1;
                }
            }
            b = b.min(total / count as f64);
        }

        let denom = a.max(b);
        scores.push(if denom == 0.0 { 0.0 } else { (b - a) / denom });
    }
    Ok(scores)
}

/// Mean silhouette over all points, in [-1, 1].
pub fn silhouette(embedding: &Embedding2D) -> Result<f64> {
    let scores = silhouette_samples(embedding)?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Row-wise comparison of two same-shaped matrices. Excluded rows (walls,
/// terminal states) carry no contribution to any aggregate.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    /// Total-variation distance per row; `None` for excluded rows.
    pub row_tv: Vec<Option<f64>>,
    pub mean_tv: f64,
    pub frobenius_relative: f64,
    pub excluded_rows: Vec<usize>,
}

/// Row TV = half the L1 distance between corresponding rows; the Frobenius
/// relative error is taken over included rows only.
pub fn matrix_error(predicted: &Mat, truth: &Mat, excluded: &[bool]) -> Result<ErrorReport> {
    if predicted.rows() != truth.rows() || predicted.cols() != truth.cols() {
        return Err(Error::Shape(format!(
            "cannot compare {}x{} against {}x{}",
            predicted.rows(),
            predicted.cols(),
            truth.rows(),
            truth.cols()
        )));
    }
    if excluded.len() != predicted.rows() {
        return Err(Error::Shape("exclusion mask length mismatch".into()));
    }
    let mut row_tv = Vec::with_capacity(predicted.rows());
    let mut tv_sum = 0.0;
    let mut included = 0usize;
    let mut diff_sq = 0.0;
    let mut truth_sq = 0.0;
    for i in 0..predicted.rows() {
        if excluded[i] {
            row_tv.push(None);
            continue;
        }
        let p = predicted.row(i);
        let q = truth.row(i);
        let tv = 0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>();
        row_tv.push(Some(tv));
        tv_sum += tv;
        included += 1;
        for (a, b) in p.iter().zip(q) {
            diff_sq += (a - b) * (a - b);
            truth_sq += b * b;
        }
    }
    let mean_tv = if included > 0 {
        tv_sum / included as f64
    } else {
        0.0
    };
    let frobenius_relative = if truth_sq > 0.0 {
        (diff_sq / truth_sq).sqrt()
    } else if diff_sq > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(ErrorReport {
        row_tv,
        mean_tv,
        frobenius_relative,
        excluded_rows: excluded
            .iter()
            .enumerate()
            .filter_map(|(i, &e)| e.then_some(i))
            .collect(),
    })
}

/// Normalized 2D autocorrelogram of a field: mean removed, correlation per
/// lag averaged over the overlap region and divided by the variance.
pub fn autocorrelogram(field: &Mat) -> Mat {
    let (rows, cols) = (field.rows(), field.cols());
    let n = (rows * cols) as f64;
    let mean = field.data().iter().sum::<f64>() / n;
    let var = field
        .data()
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n;
    let out_rows = 2 * rows - 1;
    let out_cols = 2 * cols - 1;
    let mut out = Mat::zeros(out_rows, out_cols);
    if var < 1e-24 {
        return out;
    }
    for oy in 0..out_rows {
        let dy = oy as isize - (rows as isize - 1);
        for ox in 0..out_cols {
            let dx = ox as isize - (cols as isize - 1);
            let mut acc = 0.0;
            let mut count = 0usize;
            for y in 0..rows as isize {
                let ny = y + dy;
                if ny < 0 || ny >= rows as isize {
                    continue;
                }
                for x in 0..cols as isize {
                    let nx = x + dx;
                    if nx < 0 || nx >= cols as isize {
                        continue;
                    }
                    let a = field[(y as usize, x as usize)] - mean;
                    let b = field[(ny as usize, nx as usize)] - mean;
                    acc += a * b;
                    count += 1;
                }
            }
            if count > 0 {
                out[(oy, ox)] = acc / count as f64 / var;
            }
        }
    }
    out
}

/// Count local maxima of the autocorrelogram over 8-neighborhoods. Plateaus
/// of equal values are flood-filled and counted once (their centroid). A
/// constant field has a flat correlogram and counts as a single central
/// peak.
pub fn autocorrelation_peak_count(field: &Mat) -> usize {
    let n = (field.rows() * field.cols()) as f64;
    let mean = field.data().iter().sum::<f64>() / n;
    let var = field
        .data()
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n;
    if var < 1e-24 {
        return 1;
    }
    let ac = autocorrelogram(field);
    peak_count(&ac)
}

/// Plateau-aware count of strict local maxima over 8-neighborhoods.
pub fn peak_count(grid: &Mat) -> usize {
    let (rows, cols) = (grid.rows(), grid.cols());
    let mut visited = vec![false; rows * cols];
    let mut peaks = 0usize;
    for r in 0..rows {
        for c in 0..cols {
            let idx = r * cols + c;
            if visited[idx] {
                continue;
            }
            let value = grid[(r, c)];
            // flood-fill the plateau of equal-valued 8-connected cells
            let mut component = vec![(r, c)];
            let mut stack = vec![(r, c)];
            visited[idx] = true;
            let mut is_max = true;
            while let Some((cr, cc)) = stack.pop() {
                for dr in -1isize..=1 {
                    for dc in -1isize..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let (nr, nc) = (cr as isize + dr, cc as isize + dc);
                        if nr < 0 || nc < 0 || nr as usize >= rows || nc as usize >= cols {
                            continue;
                        }
                        let (nr, nc) = (nr as usize, nc as usize);
                        let nv = grid[(nr, nc)];
                        if nv == value {
                            let nidx = nr * cols + nc;
                            if !visited[nidx] {
                                visited[nidx] = true;
                                component.push((nr, nc));
                                stack.push((nr, nc));
                            }
                        } else if nv > value {
                            is_max = false;
                        }
                    }
                }
            }
            if is_max {
                peaks += 1;
            }
            let _ = component;
        }
    }
    peaks
}

/// Spearman rank correlation with tie-averaged ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Shape("rank correlation needs equal lengths".into()));
    }
    if xs.len() < 2 {
        return Err(Error::Input(
            "rank correlation needs at least two points".into(),
        ));
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::Input(
            "rank correlation undefined for constant input".into(),
        ));
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = rank;
        }
        i = j + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn pairwise_dist(coords: &[(f64, f64)]) -> Vec<f64> {
        let n = coords.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let (xi, yi) = coords[i];
                let (xj, yj) = coords[j];
                out.push(((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt());
            }
        }
        out
    }

    #[test]
    fn mds_two_points() {
        let emb = classical_mds(&[vec![0.0, 0.0, 0.0], vec![4.0, 0.0, 0.0]]).unwrap();
        let d = pairwise_dist(&emb.coords);
        assert_abs_diff_eq!(d[0], 4.0, epsilon = 1e-9);
        // symmetric around the origin on the first axis
        assert_abs_diff_eq!(emb.coords[0].0 + emb.coords[1].0, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(emb.coords[0].0.abs(), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(emb.coords[0].1, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn mds_preserves_planar_distances() {
        // points already living in a 2D plane embedded in 5 dimensions
        let plane: Vec<Vec<f64>> = [(0.0, 0.0), (1.0, 0.5), (2.0, -1.0), (0.5, 2.0), (-1.5, 1.0)]
            .iter()
            .map(|&(x, y)| vec![x, y, 0.7 * x - 0.2 * y, 0.0, 3.0])
            .collect();
        // the third coordinate is a linear image of (x, y); distances in 5D
        // differ from the 2D ones, so compare against the true 5D distances
        let emb = classical_mds(&plane).unwrap();
        let embedded = pairwise_dist(&emb.coords);
        let mut expect = Vec::new();
        for i in 0..plane.len() {
            for j in (i + 1)..plane.len() {
                expect.push(euclidean_sq(&plane[i], &plane[j]).sqrt());
            }
        }
        for (d, e) in embedded.iter().zip(&expect) {
            assert_abs_diff_eq!(*d, *e, epsilon = 1e-8);
        }
    }

    #[test]
    fn mds_equilateral_triangle() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, (3.0f64).sqrt() / 2.0],
        ];
        let emb = classical_mds(&pts).unwrap();
        for d in pairwise_dist(&emb.coords) {
            assert_abs_diff_eq!(d, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn mds_centroid_at_origin() {
        let pts: Vec<Vec<f64>> = (0..7)
            .map(|i| vec![i as f64, (i * i) as f64 * 0.1, 3.0 - i as f64])
            .collect();
        let emb = classical_mds(&pts).unwrap();
        let (sx, sy) = emb
            .coords
            .iter()
            .fold((0.0, 0.0), |(ax, ay), &(x, y)| (ax + x, ay + y));
        assert_abs_diff_eq!(sx, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sy, 0.0, epsilon = 1e-9);
        assert!(emb.axis_eigenvalues.0 >= emb.axis_eigenvalues.1);
    }

    #[test]
    fn double_centering_zeroes_row_and_column_sums() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 9;
        let mut d2 = Mat::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = rng.gen_range(0.0..10.0);
                d2[(i, j)] = v;
                d2[(j, i)] = v;
            }
        }
        let b = double_center(&d2);
        for i in 0..n {
            let row_sum: f64 = b.row(i).iter().sum();
            let col_sum: f64 = (0..n).map(|j| b[(j, i)]).sum();
            assert_abs_diff_eq!(row_sum, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(col_sum, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn mds_rigid_motion_invariance() {
        let pts: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0],
            vec![2.0, 1.0],
            vec![-1.0, 3.0],
            vec![4.0, -2.0],
        ];
        let angle: f64 = 0.7;
        let (cos, sin) = (angle.cos(), angle.sin());
        let moved: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| {
                vec![
                    cos * p[0] - sin * p[1] + 10.0,
                    sin * p[0] + cos * p[1] - 5.0,
                ]
            })
            .collect();
        let a = pairwise_dist(&classical_mds(&pts).unwrap().coords);
        let b = pairwise_dist(&classical_mds(&moved).unwrap().coords);
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-9);
        }
    }

    #[test]
    fn mds_rejects_degenerate_input() {
        assert!(classical_mds(&[vec![1.0]]).is_err());
        assert!(classical_mds(&[vec![1.0], vec![f64::NAN]]).is_err());
        assert!(classical_mds(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn stress_mds_keeps_exact_embeddings() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, (3.0f64).sqrt() / 2.0],
        ];
        let emb = stress_mds(&pts, STRESS_MDS_ITERS).unwrap();
        for d in pairwise_dist(&emb.coords) {
            assert_abs_diff_eq!(d, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn stress_mds_deterministic() {
        let pts: Vec<Vec<f64>> = (0..9)
            .map(|i| vec![(i as f64).sin(), (i as f64 * 0.7).cos(), i as f64 * 0.1])
            .collect();
        let a = stress_mds(&pts, STRESS_MDS_ITERS).unwrap();
        let b = stress_mds(&pts, STRESS_MDS_ITERS).unwrap();
        assert_eq!(a.coords, b.coords);
    }

    #[test]
    fn stress_mds_separates_coincident_clusters_with_distinct_targets() {
        // two groups coincide in the classical top-2 projection only if their
        // separating direction carries low eigenvalue mass; the stress phase
        // must still pull same-point groups together and distinct groups apart
        let mut pts = Vec::new();
        for _ in 0..4 {
            pts.push(vec![0.0, 0.0, 0.0, 5.0]);
        }
        for _ in 0..4 {
            pts.push(vec![0.0, 0.0, 0.0, -5.0]);
        }
        let emb = stress_mds(&pts, STRESS_MDS_ITERS).unwrap();
        let d_between = {
            let (x0, y0) = emb.coords[0];
            let (x4, y4) = emb.coords[4];
            ((x0 - x4).powi(2) + (y0 - y4).powi(2)).sqrt()
        };
        assert_abs_diff_eq!(d_between, 10.0, epsilon = 1e-4);
    }

    #[test]
    fn silhouette_well_separated() {
        let emb = Embedding2D {
            coords: vec![(0.0, 0.0), (0.1, 0.0), (10.0, 0.0), (10.1, 0.0)],
            labels: Some(vec![0, 0, 1, 1]),
            captured_mass: 1.0,
            axis_eigenvalues: (1.0, 0.0),
        };
        let score = silhouette(&emb).unwrap();
        assert!(score > 0.9, "score = {score}");
    }

    #[test]
    fn silhouette_coincident_points() {
        let emb = Embedding2D {
            coords: vec![(1.0, 1.0); 4],
            labels: Some(vec![0, 0, 1, 1]),
            captured_mass: 1.0,
            axis_eigenvalues: (0.0, 0.0),
        };
        assert_eq!(silhouette(&emb).unwrap(), 0.0);
    }

    #[test]
    fn silhouette_label_permutation_invariant() {
        let coords = vec![(0.0, 0.0), (0.2, 0.1), (5.0, 5.0), (5.2, 4.9), (9.0, 0.0)];
        let a = Embedding2D {
            coords: coords.clone(),
            labels: Some(vec![0, 0, 1, 1, 2]),
            captured_mass: 1.0,
            axis_eigenvalues: (1.0, 1.0),
        };
        // swap which member of each cluster comes first
        let b = Embedding2D {
            coords: vec![coords[1], coords[0], coords[3], coords[2], coords[4]],
            labels: Some(vec![0, 0, 1, 1, 2]),
            captured_mass: 1.0,
            axis_eigenvalues: (1.0, 1.0),
        };
        assert_abs_diff_eq!(
            silhouette(&a).unwrap(),
            silhouette(&b).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn silhouette_single_label_rejected() {
        let emb = Embedding2D {
            coords: vec![(0.0, 0.0), (1.0, 1.0)],
            labels: Some(vec![3, 3]),
            captured_mass: 1.0,
            axis_eigenvalues: (1.0, 0.0),
        };
        assert!(matches!(
            silhouette(&emb),
            Err(Error::UndefinedClustering(_))
        ));
    }

    #[test]
    fn matrix_error_identity() {
        let m = Mat::from_rows(&[vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap();
        let rep = matrix_error(&m, &m, &[false, false]).unwrap();
        assert_eq!(rep.mean_tv, 0.0);
        assert_eq!(rep.frobenius_relative, 0.0);
        assert_eq!(rep.row_tv, vec![Some(0.0), Some(0.0)]);
    }

    #[test]
    fn matrix_error_half_tv() {
        let p = Mat::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let q = Mat::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let rep = matrix_error(&p, &q, &[false]).unwrap();
        assert_abs_diff_eq!(rep.row_tv[0].unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn matrix_error_against_reference_formulation() {
        // independent TV formulation: sum of positive parts
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let n = 12;
        let mut rand_stochastic = || {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
                    let sum: f64 = raw.iter().sum();
                    raw.into_iter().map(|v| v / sum).collect()
                })
                .collect();
            Mat::from_rows(&rows).unwrap()
        };
        let p = rand_stochastic();
        let q = rand_stochastic();
        let rep = matrix_error(&p, &q, &vec![false; n]).unwrap();
        for i in 0..n {
            let reference: f64 = p
                .row(i)
                .iter()
                .zip(q.row(i))
                .map(|(a, b)| (a - b).max(0.0))
                .sum();
            assert_abs_diff_eq!(rep.row_tv[i].unwrap(), reference, epsilon = 1e-12);
        }
    }

    #[test]
    fn matrix_error_excludes_rows() {
        let p = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let q = Mat::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let rep = matrix_error(&p, &q, &[false, true]).unwrap();
        assert_eq!(rep.mean_tv, 0.0);
        assert_eq!(rep.row_tv[1], None);
        assert_eq!(rep.excluded_rows, vec![1]);
    }

    #[test]
    fn matrix_error_shape_mismatch() {
        let p = Mat::zeros(2, 2);
        let q = Mat::zeros(3, 3);
        assert!(matches!(
            matrix_error(&p, &q, &[false, false]),
            Err(Error::Shape(_))
        ));
    }

    fn cosine_field(rows: usize, cols: usize, fy: f64, fx: f64) -> Mat {
        let mut m = Mat::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = (2.0 * PI * fy * r as f64 / rows as f64).cos()
                    * (2.0 * PI * fx * c as f64 / cols as f64).cos();
            }
        }
        m
    }

    #[test]
    fn constant_field_single_peak() {
        let m = Mat::from_vec(5, 5, vec![3.0; 25]).unwrap();
        assert_eq!(autocorrelation_peak_count(&m), 1);
    }

    #[test]
    fn cosine_peak_spacing_matches_period() {
        // one full period across 10 cells: correlogram peaks at lag 0 and
        // +-10 along each axis
        let m = cosine_field(10, 10, 1.0, 1.0);
        let ac = autocorrelogram(&m);
        let center = (9usize, 9usize);
        assert!(ac[center] > 0.99);
        // the next ridge along the x axis sits one period (10 cells) away
        let along_x: Vec<f64> = (0..19).map(|x| ac[(9, x)]).collect();
        let mut best = (0usize, f64::NEG_INFINITY);
        for (x, &v) in along_x.iter().enumerate() {
            if x != 9 && v > best.1 {
                best = (x, v);
            }
        }
        let lag = (best.0 as isize - 9).unsigned_abs();
        assert!((lag as isize - 10).abs() <= 1, "peak lag {lag}");
    }

    #[test]
    fn doubling_frequency_increases_peaks() {
        let slow = cosine_field(16, 16, 1.0, 1.0);
        let fast = cosine_field(16, 16, 2.0, 2.0);
        let a = autocorrelation_peak_count(&slow);
        let b = autocorrelation_peak_count(&fast);
        assert!(b > a, "peaks {a} -> {b}");
    }

    #[test]
    fn spearman_perfect_and_inverse() {
        let xs = vec![1.0, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(spearman(&xs, &[2.0, 4.0, 6.0, 8.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(spearman(&xs, &[8.0, 6.0, 4.0, 2.0]).unwrap(), -1.0);
    }

    #[test]
    fn spearman_handles_ties() {
        let xs = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = vec![1.0, 1.0, 2.0, 2.0, 3.0];
        let rho = spearman(&xs, &ys).unwrap();
        assert!(rho > 0.9);
    }
}
