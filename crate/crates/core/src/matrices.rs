//! Sampling matrices: victim sample instants against aggressor subcarriers.
//!
//! Each segment of a timing layout yields a block whose entry `(r, k)` is the
//! aggressor basis for subcarrier `k` evaluated at the aggressor-local time of
//! the segment's `r`-th sample. Blocks are stacked row-wise into `K`; columns
//! are grouped per distinct aggressor symbol, so a symbol that appears in two
//! segments (the reference symbol straddling CP and data) owns one column group
//! shared by both row blocks.

use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::{b_unchecked, SymbolVector};
use crate::error::{Error, Result};
use crate::params::OfdmNumerology;
use crate::timing::{ApLayout, Segment, UeLayout};

/// Columns of one aggressor symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnGroup {
    pub offset: i64,
    pub cols: Range<usize>,
}

/// Rows filled from one segment, and the column group they read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowBlock {
    pub rows: Range<usize>,
    pub group: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMatrix {
    pub data: DMatrix<Complex64>,
    pub block_map: Vec<ColumnGroup>,
    pub row_blocks: Vec<RowBlock>,
}

impl SamplingMatrix {
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn group_of(&self, offset: i64) -> Option<&ColumnGroup> {
        self.block_map.iter().find(|g| g.offset == offset)
    }

    /// Rows whose entries in column group `group` may be nonzero.
    pub fn rows_of_group(&self, group: usize) -> impl Iterator<Item = Range<usize>> + '_ {
        self.row_blocks
            .iter()
            .filter(move |b| b.group == group)
            .map(|b| b.rows.clone())
    }
}

/// Message vectors of several aggressor symbols keyed by relative offset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StackedSymbolVector {
    entries: Vec<(i64, SymbolVector)>,
}

impl StackedSymbolVector {
    pub fn new(mut entries: Vec<(i64, SymbolVector)>) -> Result<Self> {
        entries.sort_by_key(|(o, _)| *o);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain("duplicate symbol offset".into()));
        }
        if let Some((_, first)) = entries.first() {
            let n = first.messages.len();
            if entries.iter().any(|(_, s)| s.messages.len() != n) {
                return Err(Error::Dimension("symbols of unequal length".into()));
            }
        }
        Ok(StackedSymbolVector { entries })
    }

    pub fn entries(&self) -> &[(i64, SymbolVector)] {
        &self.entries
    }

    pub fn get(&self, offset: i64) -> Option<&SymbolVector> {
        self.entries
            .binary_search_by_key(&offset, |(o, _)| *o)
            .ok()
            .map(|i| &self.entries[i].1)
    }

    /// Flattens the symbols into the column order of `k`.
    pub fn stacked_for(&self, k: &SamplingMatrix) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); k.cols()];
        for g in &k.block_map {
            let sym = self.get(g.offset).ok_or(Error::MissingSymbol(g.offset))?;
            if sym.messages.len() != g.cols.len() {
                return Err(Error::Dimension(format!(
                    "symbol {} has {} messages, block has {} columns",
                    g.offset,
                    sym.messages.len(),
                    g.cols.len()
                )));
            }
            out[g.cols.clone()].copy_from_slice(&sym.messages);
        }
        Ok(out)
    }
}

fn sample_time(seg: &Segment, n: usize, period: f64, t_total: f64, index: usize) -> Result<f64> {
    let t = seg.local_time(n, period);
    // cut points may hand a segment a sample a hair before its start
    let slack = 1e-6 * period;
    if t >= 0.0 && t < t_total {
        Ok(t)
    } else if t < 0.0 && t > -slack {
        Ok(0.0)
    } else {
        Err(Error::Construction {
            segment: index,
            offset: seg.aggressor_symbol_offset,
            sample: n,
            time: t,
            t_total,
        })
    }
}

fn fill_block(
    out: &mut DMatrix<Complex64>,
    row0: usize,
    col0: usize,
    seg: &Segment,
    index: usize,
    aggressor: &OfdmNumerology,
    period: f64,
) -> Result<()> {
    let freqs = aggressor.frequencies();
    for (i, n) in seg.sample_range.clone().enumerate() {
        let t = sample_time(seg, n, period, aggressor.t_total, index)?;
        for (k, &f) in freqs.iter().enumerate() {
            out[(row0 + i, col0 + k)] = b_unchecked(t, f, aggressor.t_cp, aggressor.t_data);
        }
    }
    Ok(())
}

/// Block for a single segment: one row per owned victim sample, one column
/// per aggressor subcarrier.
pub fn build_segment_block(
    seg: &Segment,
    aggressor: &OfdmNumerology,
    victim_grid_period: f64,
) -> Result<SamplingMatrix> {
    let rows = seg.n_samples();
    let mut data = DMatrix::zeros(rows, aggressor.n_fft);
    fill_block(&mut data, 0, 0, seg, 0, aggressor, victim_grid_period)?;
    Ok(SamplingMatrix {
        data,
        block_map: vec![ColumnGroup {
            offset: seg.aggressor_symbol_offset,
            cols: 0..aggressor.n_fft,
        }],
        row_blocks: vec![RowBlock {
            rows: 0..rows,
            group: 0,
        }],
    })
}

/// `(segment, period, first row)` for every segment that owns samples.
type Placement<'a> = (&'a Segment, f64, usize);

fn assemble(
    rows: usize,
    placements: &[Placement<'_>],
    aggressor: &OfdmNumerology,
) -> Result<SamplingMatrix> {
    let mut offsets: Vec<i64> = placements
        .iter()
        .map(|(s, _, _)| s.aggressor_symbol_offset)
        .collect();
    offsets.sort_unstable();
    offsets.dedup();
    let n = aggressor.n_fft;
    let block_map: Vec<ColumnGroup> = offsets
        .iter()
        .enumerate()
        .map(|(g, &offset)| ColumnGroup {
            offset,
            cols: g * n..(g + 1) * n,
        })
        .collect();
    let mut data = DMatrix::zeros(rows, n * block_map.len());
    let mut row_blocks = Vec::with_capacity(placements.len());
    for (index, &(seg, period, row0)) in placements.iter().enumerate() {
        let group = offsets
            .binary_search(&seg.aggressor_symbol_offset)
            .expect("offset collected above");
        fill_block(&mut data, row0, group * n, seg, index, aggressor, period)?;
        row_blocks.push(RowBlock {
            rows: row0..row0 + seg.n_samples(),
            group,
        });
    }
    Ok(SamplingMatrix {
        data,
        block_map,
        row_blocks,
    })
}

/// `K` for the UE side: victim CP rows first, then data rows; `wifi` is the
/// aggressor whose symbols are sampled.
pub fn assemble_k_ap_ue(
    layout: &UeLayout,
    wifi: &OfdmNumerology,
    laa: &OfdmNumerology,
) -> Result<SamplingMatrix> {
    if layout.n_cp != laa.n_cp || layout.n_fft != laa.n_fft {
        return Err(Error::Dimension(format!(
            "layout built for {}+{} samples, victim '{}' has {}+{}",
            layout.n_cp, layout.n_fft, laa.label, laa.n_cp, laa.n_fft
        )));
    }
    let placements: Vec<Placement<'_>> = layout
        .segments()
        .filter(|(s, _)| s.n_samples() > 0)
        .map(|(s, period)| (s, period, layout.row_of(s, s.sample_range.start)))
        .collect();
    assemble(layout.n_cp + layout.n_fft, &placements, wifi)
}

/// `K` for the AP side over one victim symbol on the uniform victim clock;
/// `laa` is the aggressor.
pub fn assemble_k_enb_ap(
    layout: &ApLayout,
    laa: &OfdmNumerology,
    wifi: &OfdmNumerology,
) -> Result<SamplingMatrix> {
    if layout.n_total != wifi.n_total() {
        return Err(Error::Dimension(format!(
            "layout built for {} samples, victim '{}' has {}",
            layout.n_total,
            wifi.label,
            wifi.n_total()
        )));
    }
    let placements: Vec<Placement<'_>> = layout
        .segments
        .iter()
        .filter(|s| s.n_samples() > 0)
        .map(|s| (s, layout.period, s.sample_range.start))
        .collect();
    assemble(layout.n_total, &placements, laa)
}

/// Time-domain samples `K * a` (dense product).
pub fn apply(k: &SamplingMatrix, syms: &StackedSymbolVector) -> Result<Vec<Complex64>> {
    let a = nalgebra::DVector::from_vec(syms.stacked_for(k)?);
    Ok((&k.data * a).as_slice().to_vec())
}

/// Same product as [`apply`], touching only the row blocks.
pub fn apply_blocks(k: &SamplingMatrix, syms: &StackedSymbolVector) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); k.rows()];
    for block in &k.row_blocks {
        let g = &k.block_map[block.group];
        let sym = syms.get(g.offset).ok_or(Error::MissingSymbol(g.offset))?;
        if sym.messages.len() != g.cols.len() {
            return Err(Error::Dimension(format!(
                "symbol {} has {} messages, block has {} columns",
                g.offset,
                sym.messages.len(),
                g.cols.len()
            )));
        }
        for (j, a) in g.cols.clone().zip(&sym.messages) {
            let col = k.data.column(j);
            for r in block.rows.clone() {
                out[r] += col[r] * a;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timing::{resolve_ap_layout, resolve_ue_layout, Grid};

    const US: f64 = 1e-6;

    fn one(z: Complex64) -> bool {
        (z - Complex64::new(1.0, 0.0)).norm() < 1e-14
    }

    #[test]
    fn single_sample_at_data_start() {
        let wifi = OfdmNumerology::wifi_default();
        let seg = Segment {
            aggressor_symbol_offset: 0,
            grid: Grid::Uniform,
            window_start: 0.0,
            duration: 1e-9,
            aggressor_start: wifi.t_cp,
            sample_range: 0..1,
        };
        let m = build_segment_block(&seg, &wifi, 50e-9).unwrap();
        assert_eq!((m.rows(), m.cols()), (1, 64));
        assert!(one(m.data[(0, 0)]));
        assert!(m.data.iter().all(|z| one(*z)));
    }

    #[test]
    fn segment_block_rejects_out_of_symbol_times() {
        let wifi = OfdmNumerology::wifi_default();
        let seg = Segment {
            aggressor_symbol_offset: 3,
            grid: Grid::Uniform,
            window_start: 0.0,
            duration: 1e-6,
            aggressor_start: 3.9e-6,
            sample_range: 0..10,
        };
        let err = build_segment_block(&seg, &wifi, 50e-9).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Construction {
                    offset: 3,
                    sample: 2,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn g_tau1_shape() {
        let laa = OfdmNumerology::laa_default();
        let wifi = OfdmNumerology::wifi_default();
        let l = resolve_ue_layout(&laa, &wifi, 3.5 * US).unwrap();
        let g = build_segment_block(&l.data_segments[0], &wifi, l.data_period).unwrap();
        assert_eq!((g.rows(), g.cols()), (108, 64));
        assert!(g.data.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn k_ap_ue_shape_and_sparsity() {
        let laa = OfdmNumerology::laa_default();
        let wifi = OfdmNumerology::wifi_default();
        let l = resolve_ue_layout(&laa, &wifi, 3.5 * US).unwrap();
        let k = assemble_k_ap_ue(&l, &wifi, &laa).unwrap();
        assert_eq!((k.rows(), k.cols()), (2192, 19 * 64));
        let offs: Vec<i64> = k.block_map.iter().map(|g| g.offset).collect();
        assert_eq!(offs, (-2..=16).collect::<Vec<_>>());
        // symbol p feeds both a CP block and a data block
        let p = k.block_map.iter().position(|g| g.offset == 0).unwrap();
        assert_eq!(k.rows_of_group(p).count(), 2);
        for (g, grp) in k.block_map.iter().enumerate() {
            let mut owned = vec![false; k.rows()];
            for r in k.rows_of_group(g) {
                owned[r.clone()].iter_mut().for_each(|o| *o = true);
            }
            for c in grp.cols.clone() {
                for (r, &own) in owned.iter().enumerate() {
                    let z = k.data[(r, c)];
                    if own {
                        assert!((z.norm() - 1.0).abs() < 1e-12);
                    } else {
                        assert_eq!(z, Complex64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn k_ap_ue_zero_tau1() {
        let laa = OfdmNumerology::laa_default();
        let wifi = OfdmNumerology::wifi_default();
        let l = resolve_ue_layout(&laa, &wifi, 0.0).unwrap();
        let k = assemble_k_ap_ue(&l, &wifi, &laa).unwrap();
        let p = k.block_map.iter().position(|g| g.offset == 0).unwrap();
        let rows: Vec<_> = k.rows_of_group(p).collect();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].end <= laa.n_cp);
        let first_data = k
            .row_blocks
            .iter()
            .find(|b| b.rows.start == laa.n_cp)
            .unwrap();
        assert_eq!(k.block_map[first_data.group].offset, 1);
    }

    #[test]
    fn k_enb_ap_cases() {
        let laa = OfdmNumerology::laa_default();
        let wifi = OfdmNumerology::wifi_default();
        let k =
            assemble_k_enb_ap(&resolve_ap_layout(&laa, &wifi, 0.0).unwrap(), &laa, &wifi).unwrap();
        assert_eq!((k.rows(), k.cols()), (80, 2048));
        assert!(k.data.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));

        let k = assemble_k_enb_ap(
            &resolve_ap_layout(&laa, &wifi, -2.0 * US).unwrap(),
            &laa,
            &wifi,
        )
        .unwrap();
        assert_eq!(k.cols(), 4096);
        assert_eq!(k.row_blocks[0].rows, 0..40);
        assert_eq!(k.row_blocks[1].rows, 40..80);

        let k = assemble_k_enb_ap(
            &resolve_ap_layout(&laa, &wifi, -4.0 * US).unwrap(),
            &laa,
            &wifi,
        )
        .unwrap();
        assert_eq!(k.cols(), 2048);
        assert_eq!(k.block_map[0].offset, -1);
        assert_eq!(k.row_blocks[0].rows, 0..80);
    }

    #[test]
    fn apply_zero_and_dc() {
        let laa = OfdmNumerology::laa_default();
        let wifi = OfdmNumerology::wifi_default();
        let l = resolve_ue_layout(&laa, &wifi, 2.1 * US).unwrap();
        let k = assemble_k_ap_ue(&l, &wifi, &laa).unwrap();
        let offsets: Vec<i64> = k.block_map.iter().map(|g| g.offset).collect();
        let zeros = StackedSymbolVector::new(
            offsets
                .iter()
                .map(|&o| (o, SymbolVector::zeros(o, 64)))
                .collect(),
        )
        .unwrap();
        assert!(apply(&k, &zeros).unwrap().iter().all(|z| z.norm() == 0.0));
        let dc = StackedSymbolVector::new(
            offsets
                .iter()
                .map(|&o| (o, SymbolVector::one_hot(o, 64, 0)))
                .collect(),
        )
        .unwrap();
        let s = apply(&k, &dc).unwrap();
        assert_eq!(s.len(), 2192);
        assert!(s.iter().all(|z| one(*z)));
        assert_eq!(apply_blocks(&k, &dc).unwrap(), s);
    }

    #[test]
    fn apply_reports_missing_offset() {
        let laa = OfdmNumerology::laa_default();
        let wifi = OfdmNumerology::wifi_default();
        let k =
            assemble_k_enb_ap(&resolve_ap_layout(&laa, &wifi, -US).unwrap(), &laa, &wifi).unwrap();
        let only_m = StackedSymbolVector::new(vec![(0, SymbolVector::zeros(0, 2048))]).unwrap();
        assert!(matches!(apply(&k, &only_m), Err(Error::MissingSymbol(-1))));
        assert!(matches!(
            apply_blocks(&k, &only_m),
            Err(Error::MissingSymbol(-1))
        ));
    }

    #[test]
    fn stacked_rejects_duplicates() {
        let s = SymbolVector::zeros(0, 4);
        assert!(StackedSymbolVector::new(vec![(0, s.clone()), (0, s)]).is_err());
    }
}
