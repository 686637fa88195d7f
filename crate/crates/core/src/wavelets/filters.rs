use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveletName {
    #[serde(rename = "db4")]
    Db4,
    #[serde(rename = "bior3.3")]
    Bior33,
}

impl fmt::Display for WaveletName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveletName::Db4 => "db4",
            WaveletName::Bior33 => "bior3.3",
        })
    }
}

impl FromStr for WaveletName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "db4" => Ok(WaveletName::Db4),
            "bior3.3" | "bior33" => Ok(WaveletName::Bior33),
            other => Err(Error::Config(format!("unknown wavelet `{other}` (expected db4 or bior3.3)"))),
        }
    }
}

/// Decomposition and reconstruction filter pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilterBank {
    pub name: WaveletName,
    pub dec_lo: [f64; 8],
    pub dec_hi: [f64; 8],
    pub rec_lo: [f64; 8],
    pub rec_hi: [f64; 8],
}

// Coefficient tables in the layout used by PyWavelets (dec_* are applied as
// convolution kernels during analysis, rec_* during synthesis). Daubechies
// with 4 vanishing moments; biorthogonal spline (3,3) padded to 8 taps.
const DB4_DEC_LO: [f64; 8] = [
    -0.010597401785069032,
    0.0328830116668852,
    0.030841381835560764,
    -0.18703481171909309,
    -0.027983769416859854,
    0.6308807679298589,
    0.7148465705529157,
    0.2303778133088965,
];

const BIOR33_DEC_LO: [f64; 8] = [
    0.06629126073623882,
    -0.1988737822087165,
    -0.15467960838455727,
    0.9943689110435825,
    0.9943689110435825,
    -0.15467960838455727,
    -0.1988737822087165,
    0.06629126073623882,
];

const BIOR33_REC_LO: [f64; 8] = [
    0.0,
    0.0,
    0.1767766952966369,
    0.5303300858899106,
    0.5303300858899106,
    0.1767766952966369,
    0.0,
    0.0,
];

fn reversed(f: &[f64; 8]) -> [f64; 8] {
    let mut out = *f;
    out.reverse();
    out
}

/// Quadrature mirror: `hi[k] = (-1)^(k+1) * lo[L-1-k]`.
fn qmf_hi(lo: &[f64; 8]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for k in 0..8 {
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        out[k] = sign * lo[7 - k];
    }
    out
}

impl WaveletFilterBank {
    pub fn new(name: WaveletName) -> Self {
        match name {
            WaveletName::Db4 => {
                let dec_hi = qmf_hi(&DB4_DEC_LO);
                // orthogonal: synthesis filters are the time-reversed analysis filters
                WaveletFilterBank {
                    name,
                    dec_lo: DB4_DEC_LO,
                    dec_hi,
                    rec_lo: reversed(&DB4_DEC_LO),
                    rec_hi: reversed(&dec_hi),
                }
            }
            WaveletName::Bior33 => WaveletFilterBank {
                name,
                dec_lo: BIOR33_DEC_LO,
                // analysis high-pass mirrors the synthesis low-pass and vice versa
                dec_hi: qmf_hi(&BIOR33_REC_LO),
                rec_lo: BIOR33_REC_LO,
                rec_hi: qmf_hi(&BIOR33_DEC_LO).map(|x| -x),
            },
        }
    }

    pub fn filter_len(&self) -> usize {
        self.dec_lo.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db4_highpass_matches_reference_layout() {
        let b = WaveletFilterBank::new(WaveletName::Db4);
        assert_eq!(b.dec_hi[0], -0.2303778133088965);
        assert_eq!(b.dec_hi[7], -0.010597401785069032);
        assert_eq!(b.rec_hi[0], -0.010597401785069032);
        assert_eq!(b.rec_hi[7], -0.2303778133088965);
        assert_eq!(b.rec_lo[0], 0.2303778133088965);
    }

    #[test]
    fn bior_highpass_matches_reference_layout() {
        let b = WaveletFilterBank::new(WaveletName::Bior33);
        let dec_hi = [0.0, 0.0, -0.1767766952966369, 0.5303300858899106, -0.5303300858899106, 0.1767766952966369, 0.0, 0.0];
        let rec_hi = [
            0.06629126073623882,
            0.1988737822087165,
            -0.15467960838455727,
            -0.9943689110435825,
            0.9943689110435825,
            0.15467960838455727,
            -0.1988737822087165,
            -0.06629126073623882,
        ];
        for k in 0..8 {
            assert_eq!(b.dec_hi[k], dec_hi[k]);
            assert_eq!(b.rec_hi[k], rec_hi[k]);
        }
    }

    #[test]
    fn names_parse() {
        assert_eq!("db4".parse::<WaveletName>().unwrap(), WaveletName::Db4);
        assert_eq!("Bior3.3".parse::<WaveletName>().unwrap(), WaveletName::Bior33);
        assert!("haar".parse::<WaveletName>().is_err());
    }
}
