use std::io::Read;
use std::path::Path;

use stepwise_si::{Covariance64, Dataset64, Matrix64};

use crate::CliError;

/// Design columns `x1..xp` and response `y`, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

/// Reads a headed CSV with feature columns `x1..xp` (any order) and a `y`
/// column. Other columns are rejected so typos do not pass silently.
pub fn read_table(reader: impl Read) -> Result<Table, CliError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| CliError::Parse(format!("line 1: {e}")))?.clone();
    let mut feature_slot = Vec::new();
    let mut y_col = None;
    for (c, name) in header.iter().enumerate() {
        if name == "y" {
            if y_col.replace(c).is_some() {
                return Err(CliError::Parse("line 1: duplicate column `y`".into()));
            }
        } else if let Some(j) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()).filter(|&j| j >= 1) {
            feature_slot.push((j, c));
        } else {
            return Err(CliError::Parse(format!("line 1: unexpected column `{name}`, expected x1..xp and y")));
        }
    }
    let y_col = y_col.ok_or_else(|| CliError::Parse("line 1: missing column `y`".into()))?;
    feature_slot.sort_unstable();
    for (want, &(j, _)) in feature_slot.iter().enumerate() {
        if j != want + 1 {
            return Err(CliError::Parse(format!("line 1: feature columns must be x1..xp without gaps or repeats, found x{j}")));
        }
    }
    if feature_slot.is_empty() {
        return Err(CliError::Parse("line 1: no feature columns".into()));
    }
    let mut columns = vec![Vec::new(); feature_slot.len()];
    let mut y = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let line = r + 2;
        let rec = rec.map_err(|e| CliError::Parse(format!("line {line}: {e}")))?;
        let field = |c: usize| -> Result<f64, CliError> {
            let s = rec.get(c).unwrap_or("");
            let v: f64 = s.parse().map_err(|_| CliError::Parse(format!("line {line}: `{s}` is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(CliError::Parse(format!("line {line}: non-finite value `{s}`")))
            }
        };
        for (slot, &(_, c)) in feature_slot.iter().enumerate() {
            columns[slot].push(field(c)?);
        }
        y.push(field(y_col)?);
    }
    if y.is_empty() {
        return Err(CliError::Parse("no data rows".into()));
    }
    Ok(Table { columns, y })
}

/// Headerless `n x n` covariance matrix.
pub fn read_matrix(reader: impl Read) -> Result<Matrix64, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Parse(format!("covariance line {}: {e}", r + 1)))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| CliError::Parse(format!("covariance line {}: `{s}` is not a number", r + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
        return Err(CliError::Parse("covariance must be a square matrix".into()));
    }
    Ok(Matrix64::from_rows(&rows))
}

/// Dataset with columns rescaled to unit length.
pub fn load_dataset(input: &Path, sigma2: f64, sigma_file: Option<&Path>) -> Result<Dataset64, CliError> {
    let open = |p: &Path| std::fs::File::open(p).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())));
    let table = read_table(open(input)?)?;
    let n = table.y.len();
    let sigma = match sigma_file {
        Some(p) => Covariance64::dense(read_matrix(open(p)?)?),
        None => Covariance64::isotropic(n, sigma2),
    }
    .map_err(CliError::Core)?;
    let x = Matrix64::from_columns(&table.columns);
    Ok(Dataset64::with_normalized_columns(x, table.y, sigma).map_err(CliError::Core)?.0)
}
