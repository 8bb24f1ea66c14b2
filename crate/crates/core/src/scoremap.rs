//! Cosine score maps between feature windows and their reduction to a
//! per-position localization signal.
//!
//! Similarities are rescaled from `[-1, 1]` to `[0, 1]` for every aggregation
//! method, so a single threshold convention applies everywhere. Thresholds are
//! strict: an entry votes only when it is `> h`.

use crate::error::{Error, Result};
use crate::model::{MatrixView, PoolMethod, VoteKind, VoteVector};

/// `|C0| x |Ci|` matrix of rescaled cosine similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMap {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ScoreMap {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} score map",
                values.len()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Data("score map entry outside [0, 1]".into()));
        }
        Ok(ScoreMap { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.values[p * self.cols + q]
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.values[p * self.cols..(p + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn transpose(&self) -> ScoreMap {
        let mut values = Vec::with_capacity(self.values.len());
        for q in 0..self.cols {
            for p in 0..self.rows {
                values.push(self.get(p, q));
            }
        }
        ScoreMap {
            rows: self.cols,
            cols: self.rows,
            values,
        }
    }
}

/// Rows scaled to unit length in 64-bit; zero rows stay zero, so their cosine
/// against anything is 0 (rescaled 0.5).
#[derive(Debug, Clone)]
pub struct UnitRows {
    dim: usize,
    data: Vec<f64>,
}

impl UnitRows {
    pub fn new(view: MatrixView<'_>) -> Self {
        let dim = view.dim();
        let mut data = Vec::with_capacity(view.as_slice().len());
        for i in 0..view.rows() {
            let row = view.row(i);
            let norm = row.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
            if norm > 0.0 {
                data.extend(row.iter().map(|&v| v as f64 / norm));
            } else {
                data.extend(std::iter::repeat_n(0.0, dim));
            }
        }
        UnitRows { dim, data }
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Rescaled cosine similarity of every row of `self` against every row of `other`.
    pub fn score_map(&self, other: &UnitRows) -> Result<ScoreMap> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!(
                "feature dims differ: {} vs {}",
                self.dim, other.dim
            )));
        }
        let (rows, cols) = (self.rows(), other.rows());
        let mut values = Vec::with_capacity(rows * cols);
        for p in 0..rows {
            let a = self.row(p);
            for q in 0..cols {
                let cos: f64 = a.iter().zip(other.row(q)).map(|(x, y)| x * y).sum();
                values.push(((cos.clamp(-1.0, 1.0) + 1.0) / 2.0).clamp(0.0, 1.0));
            }
        }
        Ok(ScoreMap { rows, cols, values })
    }

    /// Row-wise maximum of the score map against `other`, without materializing it.
    pub fn match_vector(&self, other: &UnitRows) -> Result<VoteVector> {
        temporal_max(&self.score_map(other)?)
    }
}

pub fn cosine_score_map(reference: MatrixView<'_>, exemplar: MatrixView<'_>) -> Result<ScoreMap> {
    UnitRows::new(reference).score_map(&UnitRows::new(exemplar))
}

/// Per-reference-position best match over the exemplar's temporal dimension.
pub fn temporal_max(map: &ScoreMap) -> Result<VoteVector> {
    let values = (0..map.rows)
        .map(|p| map.row(p).iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    VoteVector::new(VoteKind::Max, values)
}

/// Number of match vectors exceeding `h` at each position.
pub fn vote_counts(match_vectors: &[VoteVector], h: f64) -> Result<Vec<usize>> {
    let first = match_vectors
        .first()
        .ok_or_else(|| Error::Argument("vote needs at least one match vector".into()))?;
    let len = first.len();
    if match_vectors.iter().any(|m| m.len() != len) {
        return Err(Error::Shape("match vectors differ in length".into()));
    }
    let mut counts = vec![0usize; len];
    for m in match_vectors {
        for (c, &v) in counts.iter_mut().zip(m.values()) {
            if v > h {
                *c += 1;
            }
        }
    }
    Ok(counts)
}

/// `L = (1/N) * sum_i 1(M_i > h)`.
pub fn vote(match_vectors: &[VoteVector], h: f64) -> Result<VoteVector> {
    let counts = vote_counts(match_vectors, h)?;
    let n = match_vectors.len() as f64;
    VoteVector::new(VoteKind::Vote, counts.iter().map(|&c| c as f64 / n).collect())
}

/// Mean or max of the score maps over exemplars, then max over exemplar time.
pub fn pool(maps: &[ScoreMap], method: PoolMethod) -> Result<VoteVector> {
    let first = maps
        .first()
        .ok_or_else(|| Error::Argument("pool needs at least one score map".into()))?;
    let (rows, cols) = (first.rows, first.cols);
    if maps.iter().any(|m| m.rows != rows || m.cols != cols) {
        return Err(Error::Shape("score maps differ in shape".into()));
    }
    let mut reduced = first.values.clone();
    for m in &maps[1..] {
        for (r, &v) in reduced.iter_mut().zip(&m.values) {
            match method {
                PoolMethod::Avg => *r += v,
                PoolMethod::Max => *r = r.max(v),
            }
        }
    }
    if method == PoolMethod::Avg {
        let n = maps.len() as f64;
        reduced.iter_mut().for_each(|r| *r /= n);
    }
    let values = reduced
        .chunks_exact(cols)
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let kind = match method {
        PoolMethod::Avg => VoteKind::Avg,
        PoolMethod::Max => VoteKind::Max,
    };
    VoteVector::new(kind, values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Localization {
    pub position: usize,
    pub confidence: f64,
}

/// Position of the maximum positive entry of `L`.
///
/// Plateaus of the maximum resolve to the midpoint `floor((a+b)/2)` of the
/// longest run `[a..b]`; equally long runs resolve to the earliest one.
/// Returns `None` when no entry is positive.
pub fn localize_vote(l: &VoteVector) -> Option<Localization> {
    let values = l.values();
    let m = l.max();
    if values.is_empty() || m <= 0.0 {
        return None;
    }
    let mut best: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for (i, &v) in values.iter().chain(std::iter::once(&f64::NEG_INFINITY)).enumerate() {
        match (v == m, run_start) {
            (true, None) => run_start = Some(i),
            (false, Some(a)) => {
                let b = i - 1;
                if best.is_none_or(|(x, y)| b - a > y - x) {
                    best = Some((a, b));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    let (a, b) = best?;
    Some(Localization {
        position: (a + b) / 2,
        confidence: m,
    })
}

/// Smallest position with `L[p] > h`.
pub fn localize_first_above(l: &VoteVector, h: f64) -> Option<usize> {
    l.values().iter().position(|&v| v > h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FeatureSequence;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn vv(kind: VoteKind, v: &[f64]) -> VoteVector {
        VoteVector::new(kind, v.to_vec()).unwrap()
    }

    fn view(data: &[f32], dim: usize) -> MatrixView<'_> {
        MatrixView::new(data, dim).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let same = cosine_score_map(view(&[0.6, 0.8], 2), view(&[0.6, 0.8], 2)).unwrap();
        assert_abs_diff_eq!(same.get(0, 0), 1.0, epsilon = 1e-12);
        let orth = cosine_score_map(view(&[1.0, 0.0], 2), view(&[0.0, 3.0], 2)).unwrap();
        assert_eq!(orth.get(0, 0), 0.5);
        let opp = cosine_score_map(view(&[1.0, 2.0], 2), view(&[-1.0, -2.0], 2)).unwrap();
        assert_abs_diff_eq!(opp.get(0, 0), 0.0, epsilon = 1e-12);
        let zero = cosine_score_map(view(&[0.0, 0.0], 2), view(&[1.0, 2.0], 2)).unwrap();
        assert_eq!(zero.get(0, 0), 0.5);
        assert!(matches!(
            cosine_score_map(view(&[1.0, 2.0], 2), view(&[1.0, 2.0, 3.0], 3)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn score_map_over_windows() {
        let seq = FeatureSequence::new("v", 4, 16, 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let w = seq.window(1, 2).unwrap();
        let m = cosine_score_map(seq.view(), w.view()).unwrap();
        assert_eq!((m.rows(), m.cols()), (3, 2));
        assert_eq!(m.get(1, 0), 1.0);
    }

    #[test]
    fn temporal_max_examples() {
        let m = ScoreMap::new(1, 1, vec![0.7]).unwrap();
        assert_eq!(temporal_max(&m).unwrap().values(), &[0.7]);
        let m = ScoreMap::new(2, 2, vec![0.1, 0.9, 0.4, 0.2]).unwrap();
        assert_eq!(temporal_max(&m).unwrap().values(), &[0.9, 0.4]);
        let m = ScoreMap::new(3, 4, vec![0.5; 12]).unwrap();
        assert_eq!(temporal_max(&m).unwrap().values(), &[0.5, 0.5, 0.5]);
    }

    #[test]
    fn vote_examples() {
        let k = VoteKind::Max;
        let ms = [
            vv(k, &[0.9, 0.1]),
            vv(k, &[0.85, 0.1]),
            vv(k, &[0.95, 0.1]),
            vv(k, &[0.2, 0.1]),
        ];
        assert_eq!(vote(&ms, 0.8).unwrap().values(), &[0.75, 0.0]);
        assert_eq!(vote(&ms, 0.99).unwrap().values(), &[0.0, 0.0]);
        assert_eq!(vote(&ms[..1], 0.8).unwrap().values(), &[1.0, 0.0]);
        // strict inequality
        assert_eq!(vote(&[vv(k, &[0.8])], 0.8).unwrap().values(), &[0.0]);
        assert!(matches!(vote(&[], 0.8), Err(Error::Argument(_))));
        assert!(matches!(
            vote(&[vv(k, &[0.1]), vv(k, &[0.1, 0.2])], 0.8),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn pool_examples() {
        let a = ScoreMap::new(2, 2, vec![0.1, 0.9, 0.4, 0.2]).unwrap();
        let b = ScoreMap::new(2, 2, vec![0.3, 0.5, 0.7, 0.1]).unwrap();
        let tm = temporal_max(&a).unwrap();
        assert_eq!(
            pool(&[a.clone(), a.clone()], PoolMethod::Avg).unwrap().values(),
            tm.values()
        );
        assert_eq!(
            pool(std::slice::from_ref(&a), PoolMethod::Max).unwrap().values(),
            tm.values()
        );
        assert_eq!(
            pool(&[a.clone(), b.clone()], PoolMethod::Max).unwrap().values(),
            &[0.9, 0.7]
        );
        let avg = pool(&[a.clone(), b], PoolMethod::Avg).unwrap();
        assert_abs_diff_eq!(avg.values()[0], 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(avg.values()[1], 0.55, epsilon = 1e-12);
        let c = ScoreMap::new(2, 1, vec![0.3, 0.5]).unwrap();
        assert!(matches!(pool(&[a, c], PoolMethod::Max), Err(Error::Shape(_))));
    }

    #[test]
    fn localize_vote_examples() {
        let k = VoteKind::Vote;
        assert_eq!(localize_vote(&vv(k, &[0.0, 0.0, 0.0])), None);
        assert_eq!(
            localize_vote(&vv(k, &[0.2, 0.8, 0.4])),
            Some(Localization {
                position: 1,
                confidence: 0.8
            })
        );
        assert_eq!(
            localize_vote(&vv(k, &[0.0, 0.75, 0.75, 0.75, 0.5, 0.75, 0.0])),
            Some(Localization {
                position: 2,
                confidence: 0.75
            })
        );
        // equal-length runs resolve to the earlier one; midpoint rounds down
        assert_eq!(localize_vote(&vv(k, &[1.0, 1.0, 0.0, 1.0, 1.0])).unwrap().position, 0);
        assert_eq!(localize_vote(&vv(k, &[0.0, 0.5, 0.5, 0.5, 0.5])).unwrap().position, 2);
        let d = VoteKind::Difference;
        assert_eq!(localize_vote(&vv(d, &[-0.5, 0.0, -0.1])), None);
        assert_eq!(localize_vote(&vv(d, &[-0.5, 0.1, -0.1])).unwrap().position, 1);
    }

    #[test]
    fn localize_first_above_examples() {
        let k = VoteKind::Avg;
        assert_eq!(localize_first_above(&vv(k, &[0.6, 0.8, 0.9]), 0.7), Some(1));
        assert_eq!(localize_first_above(&vv(k, &[0.5, 0.5]), 0.7), None);
        assert_eq!(localize_first_above(&vv(k, &[0.71]), 0.7), Some(0));
        assert_eq!(localize_first_above(&vv(k, &[0.7]), 0.7), None);
    }

    fn rows(n: usize, d: usize) -> impl Strategy<Value = Vec<f32>> {
        proptest::collection::vec(-1.0f32..1.0, n * d)
    }

    proptest! {
        #[test]
        fn score_map_transpose_symmetry(a in rows(4, 3), b in rows(5, 3)) {
            let ab = cosine_score_map(view(&a, 3), view(&b, 3)).unwrap();
            let ba = cosine_score_map(view(&b, 3), view(&a, 3)).unwrap();
            prop_assert_eq!(ab.transpose(), ba);
        }

        #[test]
        fn score_map_scale_invariance(a in rows(4, 3), b in rows(3, 3), e in -6i32..6, s in 0.01f32..100.0) {
            let base = cosine_score_map(view(&a, 3), view(&b, 3)).unwrap();
            let pow2 = 2f32.powi(e);
            let scaled: Vec<f32> = a.iter().map(|v| v * pow2).collect();
            prop_assert_eq!(&cosine_score_map(view(&scaled, 3), view(&b, 3)).unwrap(), &base);
            let scaled: Vec<f32> = a.iter().map(|v| v * s).collect();
            let m = cosine_score_map(view(&scaled, 3), view(&b, 3)).unwrap();
            for (x, y) in m.values().iter().zip(base.values()) {
                prop_assert!((x - y).abs() < 1e-6);
            }
        }

        #[test]
        fn vote_is_order_invariant(
            vs in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 6), 1..5),
            h in 0.05f64..0.95,
            rot in 0usize..5,
        ) {
            let ms: Vec<VoteVector> = vs.iter().map(|v| vv(VoteKind::Max, v)).collect();
            let mut rotated = ms.clone();
            rotated.rotate_left(rot % ms.len());
            rotated.reverse();
            prop_assert_eq!(vote(&ms, h).unwrap(), vote(&rotated, h).unwrap());
        }

        #[test]
        fn localize_invariant_under_monotone_rescaling(
            counts in proptest::collection::vec(0u32..4, 1..12),
        ) {
            let l = vv(VoteKind::Vote, &counts.iter().map(|&c| c as f64 / 3.0).collect::<Vec<_>>());
            let g = vv(VoteKind::Vote, &l.values().iter().map(|v| v * v * 0.5 + v * 0.5).collect::<Vec<_>>());
            prop_assert_eq!(
                localize_vote(&l).map(|x| x.position),
                localize_vote(&g).map(|x| x.position)
            );
        }
    }
}
