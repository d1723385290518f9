//! Multi-index helpers shared by the polynomial containers.

/// Exponent vector of a monomial.
pub type Mono = Vec<u8>;

pub fn degree(m: &[u8]) -> u32 {
    m.iter().map(|&e| e as u32).sum()
}

pub fn unit(len: usize, k: usize) -> Mono {
    let mut m = vec![0; len];
    m[k] = 1;
    m
}

pub fn add(a: &[u8], b: &[u8]) -> Mono {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Calls `f` on every multi-index `s` with `0 <= s <= bounds` componentwise.
pub fn for_each_below(bounds: &[u8], mut f: impl FnMut(&[u8])) {
    let mut cur = vec![0u8; bounds.len()];
    loop {
        f(&cur);
        let mut k = 0;
        loop {
            if k == cur.len() {
                return;
            }
            if cur[k] < bounds[k] {
                cur[k] += 1;
                break;
            }
            cur[k] = 0;
            k += 1;
        }
    }
}

/// All multi-indices of length `len` with total degree exactly `d`, in
/// lexicographic order.
pub fn of_degree(len: usize, d: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; len];
    fn rec(pos: usize, left: u32, cur: &mut Mono, out: &mut Vec<Mono>) {
        if pos + 1 == cur.len() {
            cur[pos] = left as u8;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e as u8;
            rec(pos + 1, left - e, cur, out);
        }
        cur[pos] = 0;
    }
    if len == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, d, &mut cur, &mut out);
    out
}

/// All multi-indices of length `len` with total degree at most `d`.
pub fn up_to_degree(len: usize, d: u32) -> Vec<Mono> {
    (0..=d).flat_map(|k| of_degree(len, k)).collect()
}

pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u64 / (j + 1) as u64;
    }
    acc
}

pub fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

/// `a! / (a - s)!`, zero when `s > a`.
pub fn falling(a: u8, s: u8) -> u64 {
    if s > a {
        return 0;
    }
    ((a - s + 1) as u64..=a as u64).product()
}
