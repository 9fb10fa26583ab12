mod common;

use common::{freesolv, molecules_sized, rng, sample};
use molgp::selection::{
    fold_ranges, grid_search, grid_search_graphs, kfold, mae, split_by_id, HyperGrid, SelectionError,
};
use molgp::{Dataset, GpHyperparameters, KernelHyperparameters, MeanMode, RadiiTable, Record, TrainedModel};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

fn tiny_grid() -> HyperGrid {
    HyperGrid {
        nu: vec![0.2, 0.5],
        lambda: vec![0.1],
        zeta: vec![1.0],
        q: vec![0.05],
        alpha: vec![1e-2, 1e-1],
        sigma2: vec![1.0],
        folds: 4,
        ..HyperGrid::default()
    }
}

fn small_dataset(n: usize, seed: u64) -> Dataset {
    let full = freesolv();
    let mut r = rng(seed);
    let picked: Vec<Record> = full
        .records()
        .choose_multiple(&mut r, n * 3)
        .filter(|rec| rec.smiles.len() <= 12)
        .take(n)
        .cloned()
        .collect();
    assert_eq!(picked.len(), n);
    Dataset::new(picked, "sample").unwrap()
}

#[test]
fn split_ignores_input_order() {
    let data = freesolv();
    let (train, test) = split_by_id(&data, 542.0 / 580.0).unwrap();
    assert_eq!((train.len(), test.len()), (542, 38));
    let mut recs = data.records().to_vec();
    recs.shuffle(&mut rng(31));
    let shuffled = Dataset::new(recs, "shuffled").unwrap();
    let (train2, test2) = split_by_id(&shuffled, 542.0 / 580.0).unwrap();
    assert_eq!(train.records(), train2.records());
    assert_eq!(test.records(), test2.records());
    let last_train = &train.records().last().unwrap().id;
    assert!(test.records().iter().all(|r| r.id.as_bytes() > last_train.as_bytes()));
}

#[test]
fn folds_partition_in_order() {
    let data = small_dataset(23, 32);
    let folds = kfold(&data, 5).unwrap();
    let mut seen: Vec<String> = folds.iter().flat_map(|(_, v)| v.records().iter().map(|r| r.id.clone())).collect();
    let sorted: Vec<String> = data.sorted().records().iter().map(|r| r.id.clone()).collect();
    assert_eq!(seen, sorted);
    seen.dedup();
    assert_eq!(seen.len(), 23);
    for (t, v) in &folds {
        assert_eq!(t.len() + v.len(), 23);
    }
    let sizes: Vec<usize> = fold_ranges(23, 5).unwrap().iter().map(|r| r.len()).collect();
    assert_eq!(sizes, vec![5, 5, 5, 4, 4]);
    assert!(matches!(fold_ranges(3, 5), Err(SelectionError::TooFewRecords { .. })));
}

#[test]
fn grid_search_matches_manual_folds() {
    let data = small_dataset(40, 33);
    let grid = tiny_grid();
    let out = grid_search(&data, &grid, &RadiiTable::default()).unwrap();
    let report = &out.report;
    assert_eq!(report.candidates.len(), 4);
    assert_eq!(report.fold_sizes, vec![10; 4]);
    for c in &report.candidates {
        assert_eq!(c.fold_mae.len(), 4);
        assert!(c.fold_mae.iter().all(Option::is_some));
    }
    let best = report
        .candidates
        .iter()
        .min_by(|a, b| a.score().total_cmp(&b.score()))
        .unwrap();
    assert_eq!(report.selected, best.index);

    // refit each fold independently for one candidate
    let cand = &report.candidates[3];
    let folds = kfold(&data, 4).unwrap();
    for (f, (train, valid)) in folds.iter().enumerate() {
        let g = train.graphs(&RadiiTable::default()).unwrap();
        let model = TrainedModel::fit(g, &train.targets(), &grid.kernel(&cand.candidate), &grid.gp(&cand.candidate)).unwrap();
        let pred = model.predict_mean(&valid.graphs(&RadiiTable::default()).unwrap()).unwrap();
        let expected = mae(pred.as_slice(), &valid.targets()).unwrap();
        let got = cand.fold_mae[f].unwrap();
        assert!((got - expected).abs() <= 1e-9 * expected.max(1.0), "fold {f}: {got} vs {expected}");
    }
}

#[test]
fn ties_resolve_to_first_candidate() {
    let pool = molecules_sized(2, 10);
    let mut r = rng(34);
    let graphs = sample(&pool, 20, &mut r);
    let y: Vec<f64> = (0..20).map(|_| r.random_range(-5.0..0.0)).collect();
    let mut grid = HyperGrid::single(&KernelHyperparameters::default(), &GpHyperparameters::default(), 4);
    grid.nu = vec![0.3, 0.3];
    let out = grid_search_graphs(&graphs, &y, &grid).unwrap();
    let c = &out.report.candidates;
    assert_eq!(c[0].mean_mae, c[1].mean_mae);
    assert_eq!(out.report.selected, 0);
}

#[test]
fn failed_candidates_are_not_selected() {
    let pool = molecules_sized(2, 10);
    let mut r = rng(35);
    let mut graphs = sample(&pool, 12, &mut r);
    // an exact duplicate makes the noiseless covariance singular
    graphs[1] = graphs[0].clone();
    let y: Vec<f64> = (0..12).map(|i| i as f64).collect();
    let mut grid = HyperGrid::single(&KernelHyperparameters::default(), &GpHyperparameters::new(1.0, 0.0, MeanMode::Centered), 3);
    grid.alpha = vec![0.0, 0.1];
    let out = grid_search_graphs(&graphs, &y, &grid).unwrap();
    assert!(out.report.candidates[0].mean_mae.is_none());
    assert!(out.report.candidates[0].score().is_infinite());
    assert_eq!(out.report.selected, 1);
}

#[test]
fn rejects_degenerate_setups() {
    let data = small_dataset(10, 36);
    assert!(matches!(split_by_id(&data, 0.0), Err(SelectionError::InvalidFraction(_))));
    assert!(matches!(split_by_id(&data, 0.99), Err(SelectionError::EmptySplit { .. })));
    let mut grid = tiny_grid();
    grid.folds = 1;
    assert!(matches!(grid_search(&data, &grid, &RadiiTable::default()), Err(SelectionError::InvalidFoldCount(1))));
    let dup = vec![data.records()[0].clone(), data.records()[0].clone()];
    assert!(matches!(Dataset::new(dup, "dup"), Err(SelectionError::DuplicateId(_))));
}
