//! On-disk index format: magic `FRRI`, a version byte, then fixed-width
//! little-endian sections — header, external-id map, component map, the
//! condensed DAG, τ/λ/π tables, seed arrays, and the per-node interval
//! arrays with an exactness bitset. Writing is deterministic, so
//! re-serializing a deserialized index reproduces the file byte for byte.

use std::io::{Read, Write};

use ferrari_core::cover::{Interval, LabelSet};
use ferrari_core::graph::{Graph, IdMap, SccMapping, TopoLevel, TopoOrder};
use ferrari_core::index::{BudgetMode, CoverAlgo, IndexParams, ReachIndex, SeedSets};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"FRRI";
pub const VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {0:?}, not an index file")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated file while reading {0}")]
    Truncated(&'static str),
    #[error("corrupt index file: {0}")]
    Corrupt(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn mode_byte(mode: BudgetMode) -> u8 {
    match mode {
        BudgetMode::Local => 0,
        BudgetMode::Global => 1,
    }
}

fn cover_byte(cover: CoverAlgo) -> u8 {
    match cover {
        CoverAlgo::Greedy => 0,
        CoverAlgo::Dp => 1,
    }
}

/// Serializes the index into a fresh byte buffer.
pub fn serialize_index_to_vec(idx: &ReachIndex) -> Vec<u8> {
    let dag = idx.dag();
    let (offsets, targets) = dag.out_csr();
    let params = idx.params();

    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(mode_byte(params.mode));
    out.push(cover_byte(params.cover));
    out.push(0); // reserved
    out.extend_from_slice(&params.k.to_le_bytes());
    out.extend_from_slice(&params.c.to_le_bytes());
    out.extend_from_slice(&params.seeds.to_le_bytes());
    out.extend_from_slice(&(idx.original_node_count() as u64).to_le_bytes());
    out.extend_from_slice(&(idx.original_edge_count() as u64).to_le_bytes());
    out.extend_from_slice(&(idx.scc().comp_count() as u64).to_le_bytes());
    out.extend_from_slice(&(dag.edge_count() as u64).to_le_bytes());

    for &ext in idx.ids().external_ids() {
        out.extend_from_slice(&ext.to_le_bytes());
    }
    for &c in &idx.scc().comp_of {
        out.extend_from_slice(&c.to_le_bytes());
    }
    for &o in offsets {
        out.extend_from_slice(&(o as u64).to_le_bytes());
    }
    for &t in targets {
        out.extend_from_slice(&t.to_le_bytes());
    }
    for &r in &idx.tau().tau {
        out.extend_from_slice(&r.to_le_bytes());
    }
    for &l in &idx.level().level {
        out.extend_from_slice(&l.to_le_bytes());
    }
    for &p in idx.pi() {
        out.extend_from_slice(&p.to_le_bytes());
    }

    let seeds = idx.seeds();
    out.extend_from_slice(&(seeds.seed_count() as u32).to_le_bytes());
    for &s in &seeds.seeds {
        out.extend_from_slice(&s.to_le_bytes());
    }
    for &m in seeds.plus_masks() {
        out.extend_from_slice(&m.to_le_bytes());
    }
    for &m in seeds.minus_masks() {
        out.extend_from_slice(&m.to_le_bytes());
    }

    for label in idx.labels() {
        out.extend_from_slice(&(label.len() as u32).to_le_bytes());
    }
    let total: usize = idx.labels().iter().map(LabelSet::len).sum();
    let mut exact_bits = vec![0u8; total.div_ceil(8)];
    let mut slot = 0usize;
    for label in idx.labels() {
        for iv in label.intervals() {
            out.extend_from_slice(&iv.begin.to_le_bytes());
            out.extend_from_slice(&iv.end.to_le_bytes());
            if iv.exact {
                exact_bits[slot / 8] |= 1 << (slot % 8);
            }
            slot += 1;
        }
    }
    out.extend_from_slice(&exact_bits);
    out
}

pub fn serialize_index<W: Write>(idx: &ReachIndex, mut sink: W) -> Result<(), FormatError> {
    sink.write_all(&serialize_index_to_vec(idx))?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &'static str) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(len).ok_or(FormatError::Truncated(what))?;
        if end > self.buf.len() {
            return Err(FormatError::Truncated(what));
        }
        let slice = &self.buf[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self, what: &'static str) -> Result<u8, FormatError> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn u32_vec(&mut self, len: usize, what: &'static str) -> Result<Vec<u32>, FormatError> {
        let bytes = self.take(len.checked_mul(4).ok_or(FormatError::Truncated(what))?, what)?;
        Ok(bytes.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn u64_vec(&mut self, len: usize, what: &'static str) -> Result<Vec<u64>, FormatError> {
        let bytes = self.take(len.checked_mul(8).ok_or(FormatError::Truncated(what))?, what)?;
        Ok(bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn deserialize_index<R: Read>(mut source: R) -> Result<ReachIndex, FormatError> {
    let mut buf = Vec::new();
    source.read_to_end(&mut buf)?;
    deserialize_index_from_slice(&buf)
}

pub fn deserialize_index_from_slice(buf: &[u8]) -> Result<ReachIndex, FormatError> {
    let mut cur = Cursor { buf, pos: 0 };

    let magic: [u8; 4] = cur.take(4, "magic")?.try_into().unwrap();
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = cur.u8("version")?;
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let mode = match cur.u8("mode")? {
        0 => BudgetMode::Local,
        1 => BudgetMode::Global,
        _ => return Err(FormatError::Corrupt("unknown budget mode")),
    };
    let cover = match cur.u8("cover")? {
        0 => CoverAlgo::Greedy,
        1 => CoverAlgo::Dp,
        _ => return Err(FormatError::Corrupt("unknown cover algorithm")),
    };
    cur.u8("reserved")?;
    let k = cur.u32("k")?;
    let c = cur.u32("c")?;
    let s = cur.u32("s")?;
    let orig_n = cur.u64("node count")? as usize;
    let orig_m = cur.u64("edge count")? as usize;
    let comp_n = cur.u64("component count")? as usize;
    let dag_m = cur.u64("dag edge count")? as usize;
    let dag_n = comp_n + 1;

    let ext_ids = cur.u64_vec(orig_n, "external ids")?;
    if ext_ids.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FormatError::Corrupt("external ids not strictly sorted"));
    }
    let comp_of = cur.u32_vec(orig_n, "component map")?;
    if comp_of.iter().any(|&cid| cid as usize >= comp_n) {
        return Err(FormatError::Corrupt("component id out of range"));
    }

    let offsets_raw = cur.u64_vec(dag_n + 1, "csr offsets")?;
    if offsets_raw.windows(2).any(|w| w[0] > w[1]) || offsets_raw[dag_n] as usize != dag_m {
        return Err(FormatError::Corrupt("csr offsets inconsistent"));
    }
    let targets = cur.u32_vec(dag_m, "csr targets")?;
    if targets.iter().any(|&t| t as usize >= dag_n) {
        return Err(FormatError::Corrupt("edge target out of range"));
    }
    let graph = Graph::from_out_csr(offsets_raw.iter().map(|&o| o as usize).collect(), targets);

    let tau = cur.u32_vec(dag_n, "topological order")?;
    let level = cur.u32_vec(dag_n, "topological levels")?;
    let pi = cur.u32_vec(dag_n, "post order")?;

    let seed_count = cur.u32("seed count")? as usize;
    let seeds = cur.u32_vec(seed_count, "seeds")?;
    if seeds.iter().any(|&v| v as usize >= dag_n) {
        return Err(FormatError::Corrupt("seed id out of range"));
    }
    let s_plus = cur.u64_vec(dag_n, "seed plus masks")?;
    let s_minus = cur.u64_vec(dag_n, "seed minus masks")?;

    let label_lens = cur.u32_vec(dag_n, "label lengths")?;
    let total: usize = label_lens.iter().map(|&l| l as usize).sum();
    let raw_intervals = cur.u32_vec(total * 2, "intervals")?;
    let exact_bits = cur.take(total.div_ceil(8), "exactness bitset")?;

    let mut labels = Vec::with_capacity(dag_n);
    let mut slot = 0usize;
    for &len in &label_lens {
        let mut ivs = Vec::with_capacity(len as usize);
        for _ in 0..len {
            let begin = raw_intervals[slot * 2];
            let end = raw_intervals[slot * 2 + 1];
            let exact = exact_bits[slot / 8] >> (slot % 8) & 1 == 1;
            if begin > end {
                return Err(FormatError::Corrupt("interval with begin > end"));
            }
            if let Some(prev) = ivs.last() {
                let prev: &Interval = prev;
                if prev.end as u64 + 1 >= begin as u64 {
                    return Err(FormatError::Corrupt("label intervals overlap or touch"));
                }
            }
            ivs.push(Interval { begin, end, exact });
            slot += 1;
        }
        labels.push(LabelSet::from_intervals(ivs));
    }

    if cur.pos != buf.len() {
        return Err(FormatError::Corrupt("trailing bytes after index payload"));
    }

    ReachIndex::from_parts(
        graph,
        SccMapping::from_comp_of(comp_of),
        IdMap::new(ext_ids),
        orig_m,
        TopoOrder { tau },
        TopoLevel { level },
        pi,
        labels,
        SeedSets::from_parts(seeds, s_plus, s_minus),
        IndexParams { k, mode, c, seeds: s, cover },
    )
    .map_err(|_| FormatError::Corrupt("inconsistent section lengths"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ferrari_core::graph::{Graph, IdMap, LoadedGraph};
    use ferrari_core::index::build_index;
    use ferrari_core::query::QueryContext;

    fn sample_index() -> ReachIndex {
        let graph = Graph::from_edges(5, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 4), (3, 4)]);
        let loaded = LoadedGraph { graph, ids: IdMap::identity(5) };
        build_index(&loaded, IndexParams { k: 2, ..IndexParams::default() }).unwrap()
    }

    #[test]
    fn round_trip_preserves_every_field() {
        let idx = sample_index();
        let bytes = serialize_index_to_vec(&idx);
        let back = deserialize_index_from_slice(&bytes).unwrap();
        assert_eq!(idx, back);
        // and the re-serialization is byte-identical
        assert_eq!(bytes, serialize_index_to_vec(&back));
    }

    #[test]
    fn round_trip_preserves_query_answers() {
        let idx = sample_index();
        let back = deserialize_index_from_slice(&serialize_index_to_vec(&idx)).unwrap();
        let mut a = QueryContext::new(&idx);
        let mut b = QueryContext::new(&back);
        for u in 0..5 {
            for v in 0..5 {
                assert_eq!(a.query(u, v).unwrap().0, b.query(u, v).unwrap().0);
            }
        }
    }

    #[test]
    fn bad_magic_is_distinct_error() {
        let mut bytes = serialize_index_to_vec(&sample_index());
        bytes[0] = b'X';
        assert!(matches!(deserialize_index_from_slice(&bytes), Err(FormatError::BadMagic(_))));
    }

    #[test]
    fn version_bump_is_distinct_error() {
        let mut bytes = serialize_index_to_vec(&sample_index());
        bytes[4] = VERSION + 1;
        assert!(matches!(
            deserialize_index_from_slice(&bytes),
            Err(FormatError::UnsupportedVersion(v)) if v == VERSION + 1
        ));
    }

    #[test]
    fn truncation_is_distinct_error_at_any_length() {
        let bytes = serialize_index_to_vec(&sample_index());
        for cut in [3, 7, 20, bytes.len() / 2, bytes.len() - 1] {
            match deserialize_index_from_slice(&bytes[..cut]) {
                Err(FormatError::Truncated(_)) => {}
                other => panic!("cut at {cut}: expected truncation error, got {other:?}"),
            }
        }
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let mut bytes = serialize_index_to_vec(&sample_index());
        bytes.push(0);
        assert!(matches!(deserialize_index_from_slice(&bytes), Err(FormatError::Corrupt(_))));
    }

    #[test]
    fn single_byte_corruption_never_panics() {
        let bytes = serialize_index_to_vec(&sample_index());
        for pos in 0..bytes.len() {
            for flip in [0x01u8, 0x80, 0xff] {
                let mut mutated = bytes.clone();
                mutated[pos] ^= flip;
                // any outcome is fine as long as parsing stays controlled
                let _ = deserialize_index_from_slice(&mutated);
            }
        }
    }
}
