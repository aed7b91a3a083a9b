use rand::Rng;
use serde::{Deserialize, Serialize};

use super::models::{generate_link, select_model, Endpoint, LinkChannel, LinkKind, PropagationPhysics};
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::objective::ChannelSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Parallel,
    Multihop,
}

/// Physics of one link class plus an optional blockage that zeroes it.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkClass {
    pub physics: PropagationPhysics,
    pub blocked: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkClasses {
    pub direct: LinkClass,
    pub tx_ris: LinkClass,
    pub ris_rx: LinkClass,
    pub ris_ris: LinkClass,
}

/// Fully resolved scene: every array placed and oriented.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: Topology,
    pub bs: Endpoint,
    pub user: Endpoint,
    pub panels: Vec<Endpoint>,
    pub links: LinkClasses,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        for class in [&self.links.direct, &self.links.tx_ris, &self.links.ris_rx, &self.links.ris_ris] {
            class.physics.validate()?;
        }
        if self.topology == Topology::Multihop && self.panels.is_empty() {
            return Err(Error::config("panels", "a multihop chain needs at least one panel"));
        }
        let n_ris = self.panels.first().map(|p| p.len());
        if self.panels.iter().any(|p| Some(p.len()) != n_ris) {
            return Err(Error::config("panels", "all panels must have the same element count"));
        }
        let mut centers = vec![self.bs.geometry.center, self.user.geometry.center];
        centers.extend(self.panels.iter().map(|p| p.geometry.center));
        for i in 0..centers.len() {
            for j in 0..i {
                if (centers[i] - centers[j]).norm() == 0.0 {
                    return Err(Error::config("position", "array positions must be distinct"));
                }
            }
        }
        Ok(())
    }
}

fn link<R: Rng + ?Sized>(
    tx: &Endpoint,
    rx: &Endpoint,
    class: &LinkClass,
    kind: LinkKind,
    rng: &mut R,
) -> Result<LinkChannel> {
    if class.blocked {
        return Ok(LinkChannel {
            matrix: ComplexMatrix::zeros(rx.len(), tx.len()),
            model_used: select_model(tx, rx, class.physics.wavelength()),
            link_kind: kind,
        });
    }
    generate_link(tx, rx, &class.physics, kind, rng)
}

/// All link realizations in generation order: the direct link first, then the
/// panel links in path order.
pub fn generate_scenario_links<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<Vec<LinkChannel>> {
    s.validate()?;
    let mut out = vec![link(&s.bs, &s.user, &s.links.direct, LinkKind::TxToRx, rng)?];
    match s.topology {
        Topology::Parallel => {
            for (i, p) in s.panels.iter().enumerate() {
                out.push(link(&s.bs, p, &s.links.tx_ris, LinkKind::TxToRis(i), rng)?);
                out.push(link(p, &s.user, &s.links.ris_rx, LinkKind::RisToRx(i), rng)?);
            }
        }
        Topology::Multihop => {
            let n = s.panels.len();
            out.push(link(&s.bs, &s.panels[0], &s.links.tx_ris, LinkKind::TxToRis(0), rng)?);
            for i in 1..n {
                let kind = LinkKind::RisToRis(i - 1, i);
                out.push(link(&s.panels[i - 1], &s.panels[i], &s.links.ris_ris, kind, rng)?);
            }
            out.push(link(&s.panels[n - 1], &s.user, &s.links.ris_rx, LinkKind::RisToRx(n - 1), rng)?);
        }
    }
    Ok(out)
}

/// Channel matrices for one realization; a pure function of the scenario and
/// the RNG state.
pub fn generate_scenario_channels<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<ChannelSet> {
    let mut links = generate_scenario_links(s, rng)?.into_iter().map(|l| l.matrix);
    let direct = links.next().expect("direct link is always generated");
    match s.topology {
        Topology::Parallel => {
            let mut panels = Vec::with_capacity(s.panels.len());
            while let (Some(src), Some(dst)) = (links.next(), links.next()) {
                panels.push((src, dst));
            }
            ChannelSet::parallel(direct, panels)
        }
        Topology::Multihop => ChannelSet::multihop(direct, links.collect()),
    }
}
