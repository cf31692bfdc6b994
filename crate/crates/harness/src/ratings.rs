//! MovieLens `u.data`-style ratings: `user<TAB>item<TAB>rating[<TAB>timestamp]`
//! with 1-indexed integer ids.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectra_cg::MatCompDataset;

use crate::error::{io_err, HarnessError, Result};

/// Reads and parses a ratings file. See [`parse_ratings_str`].
pub fn parse_ratings(path: &Path, subsample: f64, seed: u64, theta: f64) -> Result<MatCompDataset> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_ratings_str(&text, subsample, seed, theta)
}

/// Parses ratings into a 0-indexed dataset.
///
/// Every non-blank line is validated and checked for duplicates; after that
/// an independent coin with success probability `subsample` (one draw per
/// line, in file order, from a generator seeded with `seed`) decides whether
/// the line is kept. `d1` and `d2` are the largest ids in the whole file, so
/// subsampling never shrinks the matrix.
pub fn parse_ratings_str(text: &str, subsample: f64, seed: u64, theta: f64) -> Result<MatCompDataset> {
    if !(subsample > 0.0 && subsample <= 1.0) {
        return Err(HarnessError::Config(format!("subsample must lie in (0, 1], got {subsample}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut first_seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut kept = Vec::new();
    let (mut d1, mut d2) = (0, 0);
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (user, item, rating) = parse_line(raw, line)?;
        if let Some(prev) = first_seen.insert((user, item), line) {
            return Err(HarnessError::Parse {
                line,
                msg: format!("duplicate rating for user {user}, item {item} (first seen on line {prev})"),
            });
        }
        d1 = d1.max(user);
        d2 = d2.max(item);
        if subsample >= 1.0 || rng.random::<f64>() < subsample {
            kept.push((user - 1, item - 1, rating));
        }
    }
    if first_seen.is_empty() {
        return Err(HarnessError::Parse { line: 0, msg: "no ratings in input".into() });
    }
    Ok(MatCompDataset::new(d1, d2, kept, theta)?)
}

fn parse_line(raw: &str, line: usize) -> Result<(usize, usize, f64)> {
    let fields: Vec<&str> = raw.trim_end_matches('\r').split('\t').collect();
    if fields.len() < 3 {
        return Err(HarnessError::Parse {
            line,
            msg: format!("expected at least 3 tab-separated fields, got {}", fields.len()),
        });
    }
    let id = |s: &str, what: &str| -> Result<usize> {
        match s.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(HarnessError::Parse {
                line,
                msg: format!("{what} id {s:?} is not a positive integer"),
            }),
        }
    };
    let user = id(fields[0], "user")?;
    let item = id(fields[1], "item")?;
    let rating: f64 = fields[2].trim().parse().map_err(|_| HarnessError::Parse {
        line,
        msg: format!("rating {:?} is not a number", fields[2]),
    })?;
    if !rating.is_finite() {
        return Err(HarnessError::Parse { line, msg: format!("rating {rating} is not finite") });
    }
    Ok((user, item, rating))
}
