use std::path::PathBuf;

use cptport_core::ReturnsMatrix;

use super::{validation, CliError};
use crate::data::{fit_gmm, load_returns_csv, sample_gmm, write_returns_csv, GmmOptions};

pub struct SynthArgs {
    pub returns: PathBuf,
    pub factor: usize,
    pub seed: u64,
    pub out: PathBuf,
}

/// Extend the dataset by `factor`: fit a 3-component Gaussian mixture to
/// the observed returns and append `(factor - 1) * N` synthetic rows after
/// the originals.
pub fn run(args: &SynthArgs) -> Result<(), CliError> {
    if args.factor < 1 {
        return Err(validation(vec!["--factor must be at least 1".to_string()]));
    }
    let loaded = load_returns_csv(&args.returns)?;
    let n_original = loaded.returns.n_samples();

    let extended = if args.factor == 1 {
        loaded.returns.clone()
    } else {
        let fit = fit_gmm(&loaded.returns, 3, args.seed, &GmmOptions::default())?;
        let synthetic = sample_gmm(&fit.model, (args.factor - 1) * n_original, args.seed)?;
        let mut rows: Vec<Vec<f64>> = loaded.returns.rows().map(|r| r.to_vec()).collect();
        rows.extend(synthetic.rows().map(|r| r.to_vec()));
        ReturnsMatrix::from_rows(&rows).map_err(anyhow::Error::from)?
    };

    write_returns_csv(&args.out, &loaded.asset_names, &extended)?;
    println!(
        "wrote {} rows ({} observed + {} synthetic) to {}",
        extended.n_samples(),
        n_original,
        extended.n_samples() - n_original,
        args.out.display()
    );
    Ok(())
}
