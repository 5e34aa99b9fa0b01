use std::fs;
use std::path::Path;

use crate::ensemble::Ensemble;
use crate::{Error, Result};

/// Reads and validates an ensemble JSON file.
///
/// Schema violations and invariant breaches both surface as
/// [`Error::Parse`] carrying serde's line and column.
pub fn load_ensemble(path: impl AsRef<Path>) -> Result<Ensemble> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_owned(),
        source,
    })
}

pub fn save_ensemble(e: &Ensemble, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(e).expect("ensembles serialize");
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}
