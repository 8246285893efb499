use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::svm::{svm_train, SvmParams};
use super::Classifier;
use crate::error::{domain_err, Error, Result};
use crate::hsi_data::SampleSet;
use crate::rng::Rng;

pub const DEFAULT_C_GRID: [f64; 5] = [1.0, 10.0, 100.0, 600.0, 1000.0];
pub const DEFAULT_GAMMA_GRID: [f64; 5] = [0.01, 0.1, 0.5, 1.0, 2.0];
pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub c: f64,
    pub gamma: f64,
    /// Pooled accuracy over all held-out folds.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best_c: f64,
    pub best_gamma: f64,
    /// Folds actually used (may be fewer than requested).
    pub folds: usize,
    /// Row-major over (C, γ) in grid order.
    pub table: Vec<CvCell>,
}

/// Fold id per row: within each class the rows are shuffled and dealt
/// round-robin, so every fold sees every class with at least `folds` rows.
pub fn stratified_folds(samples: &SampleSet, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = Rng::new(seed);
    let mut fold_of = vec![0; samples.len()];
    for (_, mut rows) in samples.rows_by_class() {
        rng.shuffle(&mut rows);
        for (pos, r) in rows.into_iter().enumerate() {
            fold_of[r] = pos % folds;
        }
    }
    fold_of
}

/// Stratified k-fold cross-validation over a (C, γ) grid.
///
/// If the smallest class has fewer rows than `folds`, the fold count drops
/// to that size (with a warning); below 2 that is an error. Ties in
/// accuracy go to the smaller C, then the smaller γ.
pub fn grid_search_cv(
    train: &SampleSet,
    c_grid: &[f64],
    gamma_grid: &[f64],
    folds: usize,
    seed: u64,
    base: &SvmParams,
) -> Result<GridSearchResult> {
    if c_grid.is_empty() || gamma_grid.is_empty() {
        return domain_err("grid search needs non-empty C and gamma grids");
    }
    if folds < 2 {
        return domain_err(format!(
            "cross-validation needs at least 2 folds, got {folds}"
        ));
    }
    let smallest = train
        .rows_by_class()
        .iter()
        .map(|(_, r)| r.len())
        .min()
        .unwrap_or(0);
    let folds = if smallest < folds {
        if smallest < 2 {
            return Err(Error::Degenerate(format!(
                "a class has {smallest} training rows; cross-validation needs 2 per class"
            )));
        }
        log::warn!(
            "reducing cross-validation folds from {folds} to {smallest} (smallest class size)"
        );
        smallest
    } else {
        folds
    };

    let fold_of = stratified_folds(train, folds, seed);
    let splits: Vec<(SampleSet, SampleSet)> = (0..folds)
        .map(|f| {
            let (fit, held): (Vec<usize>, Vec<usize>) =
                (0..train.len()).partition(|&i| fold_of[i] != f);
            (train.subset(&fit), train.subset(&held))
        })
        .collect();

    let cells: Vec<(f64, f64)> = c_grid
        .iter()
        .flat_map(|&c| gamma_grid.iter().map(move |&g| (c, g)))
        .collect();
    let table: Vec<CvCell> = cells
        .par_iter()
        .map(|&(c, gamma)| {
            let params = SvmParams { c, gamma, ..*base };
            let mut correct = 0usize;
            for (fit, held) in &splits {
                let model = svm_train(fit, &params)?;
                let pred = model.predict(&held.features)?;
                correct += pred
                    .iter()
                    .zip(&held.labels)
                    .filter(|(p, t)| p == t)
                    .count();
            }
            Ok(CvCell {
                c,
                gamma,
                accuracy: correct as f64 / train.len() as f64,
            })
        })
        .collect::<Result<_>>()?;

    let best = table
        .iter()
        .copied()
        .reduce(|best, cell| {
            let better = cell.accuracy > best.accuracy
                || (cell.accuracy == best.accuracy
                    && (cell.c < best.c || (cell.c == best.c && cell.gamma < best.gamma)));
            if better {
                cell
            } else {
                best
            }
        })
        .expect("grid is non-empty");
    Ok(GridSearchResult {
        best_c: best.c,
        best_gamma: best.gamma,
        folds,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn blobs(per_class: usize, seed: u64) -> SampleSet {
        let mut rng = Rng::new(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for class in 1..=3u16 {
            for _ in 0..per_class {
                let (a, b) = rng.normal_pair();
                rows.push([class as f64 * 3.0 + 0.2 * a, 0.2 * b]);
                labels.push(class);
            }
        }
        let n = labels.len();
        SampleSet::new(
            DenseMatrix::from_rows(&rows).unwrap(),
            labels,
            (0..n).collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_cell() {
        let set = blobs(10, 1);
        let r = grid_search_cv(&set, &[5.0], &[0.3], 3, 0, &SvmParams::default()).unwrap();
        assert_eq!((r.best_c, r.best_gamma), (5.0, 0.3));
        assert_eq!(r.table.len(), 1);
    }

    #[test]
    fn default_grid_on_separable_data() {
        let set = blobs(12, 2);
        let r = grid_search_cv(
            &set,
            &DEFAULT_C_GRID,
            &DEFAULT_GAMMA_GRID,
            DEFAULT_FOLDS,
            4,
            &SvmParams::default(),
        )
        .unwrap();
        assert_eq!(r.table.len(), 25);
        let best = r
            .table
            .iter()
            .find(|c| c.c == r.best_c && c.gamma == r.best_gamma)
            .unwrap();
        assert_eq!(best.accuracy, 1.0);
        // Perfect cells tie; the smallest C (then γ) wins.
        let first_perfect = r
            .table
            .iter()
            .filter(|c| c.accuracy == 1.0)
            .min_by(|a, b| a.c.total_cmp(&b.c).then(a.gamma.total_cmp(&b.gamma)))
            .unwrap();
        assert_eq!(
            (r.best_c, r.best_gamma),
            (first_perfect.c, first_perfect.gamma)
        );
        assert!(r
            .table
            .iter()
            .any(|c| c.c == 600.0 && c.gamma == 0.5 && c.accuracy == 1.0));

        let again = grid_search_cv(
            &set,
            &DEFAULT_C_GRID,
            &DEFAULT_GAMMA_GRID,
            DEFAULT_FOLDS,
            4,
            &SvmParams::default(),
        )
        .unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn folds_reduce_for_small_classes() {
        let set = blobs(3, 5);
        let r = grid_search_cv(&set, &[1.0], &[0.5], 5, 0, &SvmParams::default()).unwrap();
        assert_eq!(r.folds, 3);
        let tiny = blobs(1, 5);
        assert!(matches!(
            grid_search_cv(&tiny, &[1.0], &[0.5], 5, 0, &SvmParams::default()),
            Err(Error::Degenerate(_))
        ));
        assert!(grid_search_cv(&set, &[], &[0.5], 5, 0, &SvmParams::default()).is_err());
        assert!(grid_search_cv(&set, &[1.0], &[0.5], 1, 0, &SvmParams::default()).is_err());
    }

    #[test]
    fn folds_are_stratified() {
        let set = blobs(10, 9);
        let fold_of = stratified_folds(&set, 5, 1);
        for f in 0..5 {
            for class in 1..=3u16 {
                let n = (0..set.len())
                    .filter(|&i| fold_of[i] == f && set.labels[i] == class)
                    .count();
                assert_eq!(n, 2);
            }
        }
    }
}
