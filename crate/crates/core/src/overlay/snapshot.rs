//! Skeleton snapshot format.
//!
//! ```text
//! art-skeleton v1
//! clusters <N'> fanout <b> c <c> seed <seed> universe <U> peer_span <S> height <h>
//! index <context size> <level> collections <Z> size <size> buckets <B> per_bucket <q> heights <h1> <h2>
//! cluster <id> keys <lo> <hi> rsi <e0> <e1> ... resampled <r0> <r1> ...
//! ```
//!
//! Index lines are sorted by `(context size, level)`, cluster lines by id.

use std::fmt::Write;

use super::ArtSkeleton;

pub const SNAPSHOT_VERSION: &str = "art-skeleton v1";

pub(super) fn render(art: &ArtSkeleton) -> String {
    let mut out = String::new();
    let cfg = art.config();
    let u = art.universe();
    writeln!(out, "{SNAPSHOT_VERSION}").unwrap();
    writeln!(
        out,
        "clusters {} fanout {} c {} seed {} universe {} peer_span {} height {}",
        art.cluster_count(),
        cfg.fanout,
        cfg.c,
        cfg.seed,
        u.max_key(),
        u.peer_span(),
        art.height()
    )
    .unwrap();
    for shape in art.indexes().values() {
        writeln!(
            out,
            "index {} {} collections {} size {} buckets {} per_bucket {} heights {} {}",
            shape.context_len,
            shape.level,
            shape.collections,
            shape.collection_size,
            shape.buckets,
            shape.per_bucket,
            shape.first_layer_height,
            shape.second_layer_height
        )
        .unwrap();
    }
    for c in art.clusters() {
        write!(out, "cluster {} keys {} {} rsi", c.id, c.key_range.0, c.key_range.1).unwrap();
        for e in &c.rsi.entries {
            write!(out, " {e}").unwrap();
        }
        out.push_str(" resampled");
        for r in &c.rsi.resamples {
            write!(out, " {r}").unwrap();
        }
        out.push('\n');
    }
    out
}
