use std::io::{self, BufRead};

use rayon::prelude::*;

/// Lines handed to workers per thread in one round.
const CHUNK_PER_JOB: usize = 1024;

pub enum Record {
    Line(String),
    Invalid,
}

impl Record {
    /// A raw line without its terminator. Lines that are not UTF-8 are
    /// reported and become `Invalid`.
    pub fn decode(mut raw: Vec<u8>) -> Record {
        if raw.last() == Some(&b'\r') {
            raw.pop();
        }
        match String::from_utf8(raw) {
            Ok(s) => Record::Line(s),
            Err(e) => {
                log::warn!("skipping line that is not UTF-8: {e}");
                Record::Invalid
            }
        }
    }
}

/// Applies `f` to every line, in parallel when `jobs > 1`, and feeds results
/// to `sink` in input order. Returns the number of undecodable lines.
pub fn map_lines<R, T, F, S>(reader: R, jobs: usize, f: F, mut sink: S) -> io::Result<usize>
where
    R: BufRead,
    T: Send,
    F: Fn(usize, &str) -> T + Sync,
    S: FnMut(T) -> io::Result<()>,
{
    let pool = if jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(io::Error::other)?,
        )
    } else {
        None
    };
    let chunk = CHUNK_PER_JOB * jobs;
    let mut invalid = 0;
    let mut index = 0;
    let mut pending: Vec<(usize, String)> = Vec::with_capacity(chunk);
    let mut lines = reader.split(b'\n');
    loop {
        let next = lines.next().transpose()?;
        let done = next.is_none();
        if let Some(raw) = next {
            match Record::decode(raw) {
                Record::Line(l) => pending.push((index, l)),
                Record::Invalid => invalid += 1,
            }
            index += 1;
        }
        if pending.len() >= chunk || (done && !pending.is_empty()) {
            let results: Vec<T> = match &pool {
                Some(p) => p.install(|| pending.par_iter().map(|(i, l)| f(*i, l)).collect()),
                None => pending.iter().map(|(i, l)| f(*i, l)).collect(),
            };
            pending.clear();
            for r in results {
                sink(r)?;
            }
        }
        if done {
            return Ok(invalid);
        }
    }
}
