use super::code::SparseMatrix;

/// Magnitude limit on every LLR and message.
pub const LLR_CLIP: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderConfig {
    pub max_iters: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self { max_iters: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutput {
    pub bits: Vec<u8>,
    /// All checks satisfied with no undecided position.
    pub converged: bool,
    pub iterations: usize,
}

/// Edge-indexed Tanner graph for the flooding sum-product decoder. Edges
/// are stored grouped by check.
#[derive(Debug, Clone)]
pub struct Decoder {
    n: usize,
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_start: Vec<usize>,
    var_edges: Vec<usize>,
}

impl Decoder {
    pub fn new(h: &SparseMatrix) -> Self {
        let n = h.cols();
        let mut check_start = Vec::with_capacity(h.rows() + 1);
        let mut edge_var = Vec::with_capacity(h.edges());
        check_start.push(0);
        for c in 0..h.rows() {
            edge_var.extend_from_slice(h.row(c));
            check_start.push(edge_var.len());
        }
        let mut per_var: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (e, &v) in edge_var.iter().enumerate() {
            per_var[v].push(e);
        }
        let mut var_start = Vec::with_capacity(n + 1);
        let mut var_edges = Vec::with_capacity(edge_var.len());
        var_start.push(0);
        for list in per_var {
            var_edges.extend(list);
            var_start.push(var_edges.len());
        }
        Self { n, check_start, edge_var, var_start, var_edges }
    }

    /// Log-domain sum-product decoding with a flooding schedule and early
    /// stop on a zero syndrome. Positive LLRs favor bit 0.
    pub fn decode(&self, llrs: &[f64], cfg: DecoderConfig) -> DecodeOutput {
        assert_eq!(llrs.len(), self.n, "LLR vector length must equal the code length");
        let ch: Vec<f64> = llrs.iter().map(|l| l.clamp(-LLR_CLIP, LLR_CLIP)).collect();
        let edges = self.edge_var.len();
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&v| ch[v]).collect();
        let mut c2v = vec![0.0; edges];
        let mut t = Vec::new();
        let mut suffix = Vec::new();
        let mut bits = vec![0u8; self.n];
        let mut posterior = ch.clone();
        for it in 1..=cfg.max_iters {
            for c in 0..self.check_start.len() - 1 {
                let (a, b) = (self.check_start[c], self.check_start[c + 1]);
                t.clear();
                t.extend(v2c[a..b].iter().map(|&x| (0.5 * x).tanh()));
                suffix.clear();
                suffix.resize(b - a + 1, 1.0);
                for i in (0..b - a).rev() {
                    suffix[i] = suffix[i + 1] * t[i];
                }
                let mut prefix = 1.0;
                for i in 0..b - a {
                    let p = (prefix * suffix[i + 1]).clamp(-1.0 + 1e-16, 1.0 - 1e-16);
                    c2v[a + i] = (2.0 * p.atanh()).clamp(-LLR_CLIP, LLR_CLIP);
                    prefix *= t[i];
                }
            }
            for v in 0..self.n {
                let es = &self.var_edges[self.var_start[v]..self.var_start[v + 1]];
                let total = ch[v] + es.iter().map(|&e| c2v[e]).sum::<f64>();
                posterior[v] = total;
                bits[v] = u8::from(total < 0.0);
                for &e in es {
                    v2c[e] = (total - c2v[e]).clamp(-LLR_CLIP, LLR_CLIP);
                }
            }
            if posterior.iter().all(|&p| p != 0.0) && self.syndrome_ok(&bits) {
                return DecodeOutput { bits, converged: true, iterations: it };
            }
        }
        DecodeOutput { bits, converged: false, iterations: cfg.max_iters }
    }

    fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.check_start.windows(2).all(|w| self.edge_var[w[0]..w[1]].iter().fold(0u8, |s, &v| s ^ bits[v]) == 0)
    }
}

/// Decodes one LLR vector against `h`.
pub fn bp_decode(h: &SparseMatrix, llrs: &[f64], max_iters: usize) -> DecodeOutput {
    Decoder::new(h).decode(llrs, DecoderConfig { max_iters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::{peg_construct, PegConfig};

    fn code() -> crate::ldpc::LdpcCode {
        peg_construct(&PegConfig { n_code: 128, n_checks: 64, ..PegConfig::ira_512_256(5) }).unwrap()
    }

    #[test]
    fn noiseless_input_converges_at_once() {
        let c = code();
        let info: Vec<u8> = (0..64).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let x = c.encode(&info).unwrap();
        let llrs: Vec<f64> = x.iter().map(|&b| if b == 0 { f64::INFINITY } else { f64::NEG_INFINITY }).collect();
        let out = bp_decode(c.parity_check(), &llrs, 100);
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.bits, x);
    }

    #[test]
    fn zero_llrs_do_not_converge() {
        let c = code();
        let out = bp_decode(c.parity_check(), &vec![0.0; 128], 20);
        assert!(!out.converged);
        assert_eq!(out.iterations, 20);
    }

    #[test]
    fn corrects_a_few_flipped_bits() {
        let c = code();
        let x = c.encode(&vec![0u8; 64]).unwrap();
        let mut llrs = vec![3.0; 128];
        for i in [3, 40, 90] {
            llrs[i] = -1.0;
        }
        let out = bp_decode(c.parity_check(), &llrs, 50);
        assert!(out.converged);
        assert_eq!(out.bits, x);
    }

    #[test]
    fn erasures_are_filled_in() {
        let c = code();
        let info: Vec<u8> = (0..64).map(|i| (i % 2) as u8).collect();
        let x = c.encode(&info).unwrap();
        let mut llrs: Vec<f64> = x.iter().map(|&b| if b == 0 { 5.0 } else { -5.0 }).collect();
        for i in (64..128).step_by(8) {
            llrs[i] = 0.0;
        }
        let out = bp_decode(c.parity_check(), &llrs, 50);
        assert!(out.converged);
        assert_eq!(out.bits, x);
    }
}
