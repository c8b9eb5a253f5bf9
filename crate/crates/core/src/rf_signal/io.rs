//! Spectrogram dump: 16-byte header (`"SPEC"`, `u32` frames, `u32` bins,
//! `u32` interval index, little-endian) followed by row-major `f64` values.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::spectrogram::Spectrogram;

const MAGIC: &[u8; 4] = b"SPEC";

pub fn write_spectrogram<W: Write>(mut out: W, s: &Spectrogram) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(s.frames() as u32).to_le_bytes())?;
    out.write_all(&(s.bins() as u32).to_le_bytes())?;
    out.write_all(&s.interval().to_le_bytes())?;
    for v in s.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_spectrogram<R: Read>(mut input: R) -> Result<Spectrogram> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if &header[..4] != MAGIC {
        return Err(Error::InvalidParameter {
            name: "spectrogram",
            reason: "bad magic".into(),
        });
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let (frames, bins, interval) = (word(4) as usize, word(8) as usize, word(12));
    let mut raw = vec![0u8; frames * bins * 8];
    input.read_exact(&mut raw)?;
    let mag = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Spectrogram::new(frames, bins, mag, interval)
}

/// One CSV row per frame.
pub fn write_spectrogram_csv<W: Write>(out: W, s: &Spectrogram) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for m in 0..s.frames() {
        w.write_record(s.row(m).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let s = Spectrogram::new(2, 3, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.5], 7).unwrap();
        let mut buf = Vec::new();
        write_spectrogram(&mut buf, &s).unwrap();
        assert_eq!(buf.len(), 16 + 6 * 8);
        assert_eq!(&buf[..4], b"SPEC");
        assert_eq!(&buf[4..16], &[2, 0, 0, 0, 3, 0, 0, 0, 7, 0, 0, 0]);
        assert_eq!(&buf[16 + 5 * 8..], &5.5f64.to_le_bytes());
    }

    #[test]
    fn bad_magic_rejected() {
        let buf = b"SPEK\0\0\0\0\0\0\0\0\0\0\0\0".to_vec();
        assert!(read_spectrogram(&buf[..]).is_err());
    }

    #[test]
    fn csv_rows_per_frame() {
        let s = Spectrogram::new(2, 2, vec![0.0, 1.0, 2.0, 3.5], 0).unwrap();
        let mut buf = Vec::new();
        write_spectrogram_csv(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0,1\n2,3.5\n");
    }

    proptest! {
        #[test]
        fn binary_round_trip(frames in 1usize..6, bins in 1usize..9, interval in any::<u32>(), seed in any::<u64>()) {
            let mag: Vec<f64> = (0..frames * bins)
                .map(|i| ((seed.wrapping_mul(i as u64 + 1) % 10_000) as f64) / 7.0)
                .collect();
            let s = Spectrogram::new(frames, bins, mag, interval).unwrap();
            let mut buf = Vec::new();
            write_spectrogram(&mut buf, &s).unwrap();
            prop_assert_eq!(read_spectrogram(&buf[..]).unwrap(), s);
        }
    }
}
