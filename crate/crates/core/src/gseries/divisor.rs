use std::io::{self, Read, Write};

use crate::error::{domain, Result};

/// Divisor counts `tau(m)` for `1 <= m <= limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorTable {
    // tau[0] is unused and kept at zero
    tau: Vec<u32>,
}

/// Multiple-marking sieve, `O(M log M)`.
pub fn divisor_sieve(limit: usize) -> Result<DivisorTable> {
    if limit == 0 {
        return domain("divisor table limit must be at least 1");
    }
    let mut tau = vec![0u32; limit + 1];
    for d in 1..=limit {
        for m in (d..=limit).step_by(d) {
            tau[m] += 1;
        }
    }
    Ok(DivisorTable { tau })
}

impl DivisorTable {
    pub fn limit(&self) -> usize {
        self.tau.len() - 1
    }

    /// `tau(m)`; panics outside `1..=limit`.
    #[inline]
    pub fn get(&self, m: usize) -> u32 {
        assert!(m >= 1, "tau(0) is undefined");
        self.tau[m]
    }

    /// `tau(1), ..., tau(limit)`.
    pub fn values(&self) -> &[u32] {
        &self.tau[1..]
    }

    /// Little-endian `u32` count followed by that many `u32` values.
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = u32::try_from(self.limit())
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "table too large for u32 count"))?;
        w.write_all(&n.to_le_bytes())?;
        let mut buf = Vec::with_capacity(4 * self.limit());
        for v in self.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)
    }

    /// Reads the format written by [`DivisorTable::write_to`] and spot-checks
    /// the contents against trial division. Any mismatch is `InvalidData`.
    pub fn read_from<R: Read>(mut r: R) -> io::Result<Self> {
        let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
        let mut head = [0u8; 4];
        r.read_exact(&mut head)?;
        let n = u32::from_le_bytes(head) as usize;
        if n == 0 {
            return Err(bad("empty divisor table"));
        }
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 4 * n {
            return Err(bad("divisor table length does not match its header"));
        }
        let mut tau = Vec::with_capacity(n + 1);
        tau.push(0);
        tau.extend(body.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])));
        let table = DivisorTable { tau };
        let probes = 64.min(n);
        for i in 0..probes {
            // deterministic spread of probe positions, always including 1 and n
            let m = 1 + (i * (n - 1)) / (probes.max(2) - 1).max(1);
            let m = m.min(n);
            if table.tau[m] != tau_trial(m) {
                return Err(bad("divisor table failed spot check"));
            }
        }
        Ok(table)
    }
}

/// `tau(m)` by trial division.
pub fn tau_trial(m: usize) -> u32 {
    let mut count = 0;
    let mut d = 1;
    while d * d <= m {
        if m % d == 0 {
            count += if d * d == m { 1 } else { 2 };
        }
        d += 1;
    }
    count
}
