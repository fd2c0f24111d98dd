//! Noise spectrum of the two joint quadratures with a calibrated cavity source.

use cvbridge::config::{parse_document, EXPERIMENT_DEFAULTS};
use cvbridge::{spectrum_sweep, Grid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc = parse_document(EXPERIMENT_DEFAULTS)?;
    let grid = doc.sweep.unwrap_or(Grid::frequency(0.0, 40.0, 81)?);
    let trace = spectrum_sweep(&doc.scenario, &grid)?;
    let xs = trace.channel("xsum_db").unwrap_or_default();
    let last = trace
        .points
        .iter()
        .zip(&xs)
        .take_while(|(_, &db)| db <= -3.0)
        .map(|(p, _)| p.x)
        .last();
    if let Some(f) = last {
        eprintln!("more than 3 dB below vacuum up to {f:.2} MHz");
    }
    print!("{}", trace.to_csv_string());
    Ok(())
}
