//! Times one kernel matrix over a CSV dataset.
//!
//! cargo run --release -p molgp --example kernel_timing -- data/freesolv.csv [nu lambda zeta q]

use std::time::Instant;

use molgp::io::load_csv;
use molgp::kernel::kernel_matrix;
use molgp::{KernelHyperparameters, RadiiTable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args.first().map(String::as_str).unwrap_or("data/freesolv.csv");
    let p: Vec<f64> = args.get(1..).unwrap_or_default().iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    let mut hyper = match p.as_slice() {
        [nu, lambda, zeta, q] => KernelHyperparameters::new(*nu, *lambda, *zeta, *q),
        _ => KernelHyperparameters::default(),
    };
    if let Ok(s) = std::env::var("SOLVER") {
        hyper.solver = serde_json::from_str(&format!("{s:?}"))?;
    }
    let data = load_csv(path)?;
    let graphs = data.graphs(&RadiiTable::default())?;
    let t = Instant::now();
    let k = kernel_matrix(&graphs, &hyper, true)?;
    let secs = t.elapsed().as_secs_f64();
    let off: f64 = k.values.iter().sum::<f64>() - k.values.nrows() as f64;
    println!(
        "{} graphs, {:.2} s, mean off-diagonal {:.4}",
        graphs.len(),
        secs,
        off / (k.values.len() - k.values.nrows()) as f64
    );
    Ok(())
}
