#![allow(dead_code)]

use std::path::PathBuf;

use molgp::io::load_csv;
use molgp::smiles::graph_from_smiles;
use molgp::{Dataset, MolecularGraph, RadiiTable};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn freesolv() -> Dataset {
    load_csv(data_path("freesolv.csv")).expect("bundled dataset loads")
}

pub fn graph(smiles: &str) -> MolecularGraph {
    graph_from_smiles(smiles, "", &RadiiTable::default()).expect("valid SMILES")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// FreeSolv molecules with `min..=max` heavy atoms.
pub fn molecules_sized(min: usize, max: usize) -> Vec<MolecularGraph> {
    let data = freesolv();
    data.graphs(&RadiiTable::default())
        .expect("bundled dataset perceives")
        .into_iter()
        .filter(|g| (min..=max).contains(&g.n_vertices()))
        .collect()
}

pub fn sample(pool: &[MolecularGraph], k: usize, rng: &mut ChaCha8Rng) -> Vec<MolecularGraph> {
    pool.choose_multiple(rng, k).cloned().collect()
}

pub fn random_pairs(pool: &[MolecularGraph], k: usize, rng: &mut ChaCha8Rng) -> Vec<(MolecularGraph, MolecularGraph)> {
    (0..k)
        .map(|_| {
            let a = pool.choose(rng).unwrap().clone();
            let b = pool.choose(rng).unwrap().clone();
            (a, b)
        })
        .collect()
}

pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
