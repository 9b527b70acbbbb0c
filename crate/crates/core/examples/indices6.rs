//! Writes the bundled six-variable return sample `data/indices6.csv`.
//!
//! Truth: a 1-truncated Student-t vine whose first tree is the star-like tree
//! 5-6, 5-4, 5-1, 6-2, 4-3, with t(4) margins scaled to daily-return size.
//!
//! Usage: `cargo run --example indices6 -- [path]`

use ndarray::Array2;
use vinelasso::data::{Dataset, Scale};
use vinelasso::special::StudentT;
use vinelasso::{FittedVine, PairCopula, PartialMatrix};

const N: usize = 1000;
const SEED: u64 = 20130101;

fn truth() -> vinelasso::Result<FittedVine> {
    let diag = [3, 2, 1, 4, 6, 5];
    let partners = [4, 6, 5, 5, 5];
    let d = diag.len();
    let mut p = PartialMatrix::with_diagonal(&diag)?;
    for (j, &k) in partners.iter().enumerate() {
        p.set(d, j + 1, k);
    }
    for i in (2..d).rev() {
        for j in 1..i {
            let allowed = p.allowed_entries(i, j)?;
            p.set(i, j, allowed[0]);
        }
    }
    let m = p.finish()?;
    let rho = [0.55, 0.6, 0.65, 0.7, 0.75];
    let mut rows: Vec<Vec<PairCopula>> = (0..d).map(|i| vec![PairCopula::independence(); i]).collect();
    for (j, &r) in rho.iter().enumerate() {
        rows[d - 1][j] = PairCopula::student_t(r, 5.0)?;
    }
    FittedVine::from_copulas(m, rows)
}

fn main() -> vinelasso::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/indices6.csv".into());
    let u = vinelasso::vine::simulate(&truth()?, N, SEED)?;
    let t4 = StudentT::new(4.0);
    let scale = [0.011, 0.013, 0.015, 0.012, 0.010, 0.009];
    let x = Array2::from_shape_fn((N, 6), |(i, j)| scale[j] * t4.quantile(u.values()[[i, j]]));
    let names = (1..=6).map(|j| format!("index{j}")).collect();
    let data = Dataset::new(x, Scale::X, names)?;
    if let Some(dir) = std::path::Path::new(&path).parent() {
        std::fs::create_dir_all(dir)?;
    }
    data.write_csv(std::fs::File::create(&path)?)?;
    eprintln!("wrote {N} x 6 to {path}");
    Ok(())
}
