//! Labeled tensor networks contracted by sequential absorption.
//!
//! Every leg carries a label; a label on two nodes is a bond, a label on one node is open.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::tensors::{contract, DenseTensor};

#[derive(Clone, Debug)]
pub struct Node {
    pub tensor: DenseTensor,
    pub legs: Vec<u64>,
}

impl Node {
    pub fn new(tensor: DenseTensor, legs: Vec<u64>) -> Self {
        assert_eq!(tensor.rank(), legs.len(), "one label per axis");
        Self { tensor, legs }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Multiply-add count summed over pairwise contractions.
    pub ops: u128,
    /// Largest intermediate tensor, in entries.
    pub max_size: u128,
}

pub fn merge(a: Node, b: &Node, stats: &mut Stats, limit: u128) -> Result<Node> {
    let mut pairs = Vec::new();
    for (i, la) in a.legs.iter().enumerate() {
        if let Some(j) = b.legs.iter().position(|lb| lb == la) {
            pairs.push((i, j));
        }
    }
    let out_legs: Vec<u64> = a
        .legs
        .iter()
        .enumerate()
        .filter(|(i, _)| !pairs.iter().any(|p| p.0 == *i))
        .map(|(_, &l)| l)
        .chain(
            b.legs
                .iter()
                .enumerate()
                .filter(|(j, _)| !pairs.iter().any(|p| p.1 == *j))
                .map(|(_, &l)| l),
        )
        .collect();
    let size_a = a.tensor.len() as u128;
    let size_b = b.tensor.len() as u128;
    let k: u128 = pairs.iter().map(|p| a.tensor.shape()[p.0] as u128).product();
    let out_size = size_a / k * (size_b / k);
    if out_size > limit {
        return Err(Error::Guard { what: "network intermediate".into(), size: out_size, limit });
    }
    stats.ops += out_size * k;
    stats.max_size = stats.max_size.max(out_size);
    let t = contract(&a.tensor, &b.tensor, &pairs)?;
    Ok(Node::new(t, out_legs))
}

/// Contract nodes in the given order, starting from `order[0]` and absorbing one node at a time.
/// The result has its open legs permuted to `open`.
pub fn contract_sequential(
    nodes: &[Node],
    order: &[usize],
    open: &[u64],
    limit: u128,
) -> Result<(DenseTensor, Stats)> {
    check_labels(nodes, open)?;
    let mut seen = vec![false; nodes.len()];
    for &i in order {
        if i >= nodes.len() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Shape(format!("bad contraction order entry {i}")));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Shape("contraction order does not cover every node".into()));
    }
    let mut stats = Stats::default();
    let mut acc = nodes[order[0]].clone();
    stats.max_size = acc.tensor.len() as u128;
    for &i in &order[1..] {
        acc = merge(acc, &nodes[i], &mut stats, limit)?;
    }
    finish(acc, open, stats)
}

/// Greedy pairwise contraction: repeatedly merge the connected pair with the smallest result.
pub fn contract_greedy(nodes: &[Node], open: &[u64], limit: u128) -> Result<(DenseTensor, Stats)> {
    check_labels(nodes, open)?;
    let mut pool: Vec<Option<Node>> = nodes.iter().cloned().map(Some).collect();
    let mut stats = Stats::default();
    loop {
        let live: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].is_some()).collect();
        if live.len() == 1 {
            let acc = pool[live[0]].take().expect("live node");
            return finish(acc, open, stats);
        }
        let mut best: Option<(u128, usize, usize)> = None;
        for (ai, &i) in live.iter().enumerate() {
            for &j in &live[ai + 1..] {
                let (a, b) = (pool[i].as_ref().unwrap(), pool[j].as_ref().unwrap());
                let mut k: u128 = 1;
                let mut shared = false;
                for (x, la) in a.legs.iter().enumerate() {
                    if b.legs.contains(la) {
                        shared = true;
                        k *= a.tensor.shape()[x] as u128;
                    }
                }
                if !shared {
                    continue;
                }
                let size = (a.tensor.len() as u128 / k) * (b.tensor.len() as u128 / k);
                if best.is_none_or(|bst| size < bst.0) {
                    best = Some((size, i, j));
                }
            }
        }
        let (i, j) = match best {
            Some((_, i, j)) => (i, j),
            // disconnected pieces: take an outer product of the two smallest
            None => {
                let mut by_size = live.clone();
                by_size.sort_by_key(|&i| pool[i].as_ref().unwrap().tensor.len());
                (by_size[0], by_size[1])
            }
        };
        let a = pool[i].take().unwrap();
        let b = pool[j].take().unwrap();
        pool[i] = Some(merge(a, &b, &mut stats, limit)?);
    }
}

fn check_labels(nodes: &[Node], open: &[u64]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::Shape("empty network".into()));
    }
    let mut count: HashMap<u64, (usize, usize)> = HashMap::new();
    for n in nodes {
        for (x, &l) in n.legs.iter().enumerate() {
            let e = count.entry(l).or_insert((0, n.tensor.shape()[x]));
            e.0 += 1;
            if e.1 != n.tensor.shape()[x] {
                return Err(Error::Shape(format!("label {l} has mismatched extents")));
            }
        }
    }
    for (&l, &(k, _)) in &count {
        let is_open = open.contains(&l);
        if k > 2 || (k == 2 && is_open) || (k == 1 && !is_open) {
            return Err(Error::Shape(format!("label {l} used {k} times (open: {is_open})")));
        }
    }
    if open.len() != count.values().filter(|v| v.0 == 1).count() {
        return Err(Error::Shape("open label list does not match the network".into()));
    }
    Ok(())
}

fn finish(acc: Node, open: &[u64], stats: Stats) -> Result<(DenseTensor, Stats)> {
    let perm: Vec<usize> = open
        .iter()
        .map(|l| acc.legs.iter().position(|x| x == l).expect("open label survives"))
        .collect();
    Ok((acc.tensor.permute(&perm)?, stats))
}
