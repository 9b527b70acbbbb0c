//! Select a structure on the bundled sample, fit it at one threshold and
//! print the information criteria.
//!
//! Usage: `cargo run --example quickstart -- [csv]`

use vinelasso::select::{select_structure, SelectionConfig};
use vinelasso::threshold::single_threshold;
use vinelasso::vine::{self, information_criteria, VineFitConfig};
use vinelasso::Dataset;

fn main() -> vinelasso::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/indices6.csv".into());
    let x: Dataset = vinelasso::data::load_csv(&path, true)?;
    let u = x.to_pseudo_observations()?;
    let z = u.to_z_scale()?;

    let sel = select_structure(&z, &SelectionConfig { seed: 5, ..SelectionConfig::default() })?;
    println!("diagonal {:?}", sel.matrix.diagonal());

    let pattern = single_threshold(&sel.lambda, 0.25f64.powi(4))?;
    let fitted = vine::fit(&u, &sel.matrix, &pattern, &VineFitConfig::default())?;
    let ic = information_criteria(&fitted, u.n());
    println!("p = {}, loglik = {:.2}, BIC = {:.2}, mBIC = {:.2}", ic.n_params, ic.loglik, ic.bic, ic.mbic);
    for e in fitted.edges().iter().filter(|e| !e.copula.is_independence()) {
        println!("  tree {} {:<10} {:?}", e.tree, e.label, e.copula.family);
    }
    Ok(())
}
