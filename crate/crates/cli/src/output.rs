//! Number formatting, ordered parallel sweeps and CSV chunk writing.

use rayon::prelude::*;

/// Shortest decimal string that parses back to the same `f64`.
///
/// Plain notation in `[1e-5, 1e16)`, exponent notation outside it.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Nodes handled by one task of a sweep.
pub const CHUNK: usize = 64;

/// Maps `f` over contiguous chunks of `items` and returns the per-chunk
/// results in index order.
pub fn chunked<T, R, F>(items: &[T], workers: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> R + Sync + Send,
{
    let run = || items.par_chunks(CHUNK).map(&f).collect::<Vec<R>>();
    match workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}

/// Encodes rows as RFC 4180 CSV lines.
pub fn csv_rows<I, R>(rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV of UTF-8 fields")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-300, 6.02e23, -1e-7, f64::MAX, f64::MIN_POSITIVE, 12345.678] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-0.25), "-0.25");
        assert_eq!(num(1e-7), "1e-7");
    }

    #[test]
    fn chunks_keep_order() {
        let xs: Vec<usize> = (0..1000).collect();
        let sums = chunked(&xs, Some(4), |c| c.to_vec());
        assert_eq!(sums.concat(), xs);
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        let s = csv_rows([vec!["1".to_string(), "a, b".to_string()]]);
        assert_eq!(s, "1,\"a, b\"\n");
    }
}
