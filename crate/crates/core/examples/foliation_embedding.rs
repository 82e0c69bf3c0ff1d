//! Minkowski geometry in one space dimension: interval classes under boosts,
//! causal precedence and embedding of tagged events on spacelike surfaces.

use relhist::relativistic::{boost, classify_interval, embed_events, Region, SpacetimePoint, TaggedEvent};
use relhist::scenarios::build_epr;
use relhist::Error;

fn main() -> relhist::Result<()> {
    let p = SpacetimePoint::new(0.0, 0.0)?;
    for q in [SpacetimePoint::new(3.0, 1.0)?, SpacetimePoint::new(1.0, 3.0)?, SpacetimePoint::new(2.0, 2.0)?] {
        let moved = (boost(&p, 0.6)?, boost(&q, 0.6)?);
        println!(
            "({}, {}): {:?}, after a 0.6 boost {:?}",
            q.x,
            q.t,
            classify_interval(&p, &q),
            classify_interval(&moved.0, &moved.1)
        );
    }

    let local = |id: &str, x: i64, t: f64| TaggedEvent::local(id, Region::at(x, t));
    let events = vec![local("a", -15, 30.0), local("b", 15, 30.0), local("a'", -12, 24.0), local("b'", 20, 40.0)];
    let emb = embed_events(&events)?;
    println!("local events embed in order {:?}", emb.order);
    for (id, s) in &emb.foliation.surfaces {
        println!("  {id:>3}: {:?}", s.knots());
    }

    let scn = build_epr()?;
    let entangled: Vec<TaggedEvent> = ["E1", "E'1"].iter().map(|id| scn.event(id).cloned()).collect::<Result<_, _>>()?;
    match embed_events(&entangled) {
        Err(Error::EmbeddingImpossible { entangled, other }) => {
            println!("entangled events cannot share a foliation: `{entangled}` must lie both before and after `{other}`")
        }
        r => println!("unexpected: {r:?}"),
    }
    Ok(())
}
