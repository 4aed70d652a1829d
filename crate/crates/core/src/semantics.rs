//! Reducts, answer sets, world views and the exhaustive oracles.
//!
//! Everything here enumerates. The functions are the reference semantics the
//! dynamic programming in [`crate::dp`] is tested against, and they double as
//! the internal base solver.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::Zero;

use crate::atoms::{Atom, Literal};
use crate::program::{BodyElement, Program, Rule};
use crate::wvi::Wvi;
use crate::{Count, Error, Probability, Result};

/// A set of true atoms.
pub type Interpretation = BTreeSet<Atom>;

/// Size limits for the exhaustive procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of derivable atoms when enumerating answer sets.
    pub atoms: usize,
    /// Maximum number of epistemic atoms when enumerating world views.
    pub epistemic: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            atoms: 24,
            epistemic: 12,
        }
    }
}

/// Gelfond-Lifschitz reduct of a plain program.
pub fn gl_reduct(program: &Program, interpretation: &Interpretation) -> Result<Program> {
    program.ensure_plain()?;
    let rules = program
        .rules
        .iter()
        .filter(|r| !r.negative_body().any(|a| interpretation.contains(&a)))
        .map(|r| {
            let body = r
                .positive_body()
                .map(|a| BodyElement::Objective(Literal::pos(a)))
                .collect();
            Rule::new(r.head.iter().copied(), body)
        })
        .collect();
    Ok(program.with_rules(rules))
}

/// Atoms that can be derived at all, ignoring negation. No answer set
/// contains an atom outside this set.
fn derivable_atoms(program: &Program) -> BTreeSet<Atom> {
    let mut derivable = BTreeSet::new();
    loop {
        let before = derivable.len();
        for rule in &program.rules {
            if rule.positive_body().all(|a| derivable.contains(&a)) {
                derivable.extend(rule.head.iter().copied());
            }
        }
        if derivable.len() == before {
            return derivable;
        }
    }
}

/// A rule over dense indices `0..m`.
#[derive(Debug, Clone)]
struct LocalRule {
    head: Vec<usize>,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

impl LocalRule {
    fn max_index(&self) -> Option<usize> {
        self.head
            .iter()
            .chain(&self.pos)
            .chain(&self.neg)
            .copied()
            .max()
    }

    fn violated(&self, value: &[bool]) -> bool {
        self.pos.iter().all(|&i| value[i])
            && self.neg.iter().all(|&i| !value[i])
            && self.head.iter().all(|&i| !value[i])
    }
}

/// Enumerates all answer sets of a plain program.
pub fn answer_sets(program: &Program) -> Result<Vec<Interpretation>> {
    answer_sets_capped(program, Caps::default().atoms)
}

/// Like [`answer_sets`], with `cap` bounding the derivable atoms of each
/// independent part of the program. Parts sharing no atom are enumerated
/// separately and their answer sets combined.
pub fn answer_sets_capped(program: &Program, cap: usize) -> Result<Vec<Interpretation>> {
    program.ensure_plain()?;
    let derivable: Vec<Atom> = derivable_atoms(program).into_iter().collect();
    let index: BTreeMap<Atom, usize> = derivable.iter().enumerate().map(|(i, &a)| (a, i)).collect();

    // Atoms outside the derivable set are false everywhere, so rules mentioning
    // them positively are satisfied and negative occurrences are true.
    let mut rules = Vec::new();
    for rule in &program.rules {
        if rule.positive_body().any(|a| !index.contains_key(&a)) {
            continue;
        }
        let local = LocalRule {
            head: rule
                .head
                .iter()
                .filter_map(|a| index.get(a).copied())
                .collect(),
            pos: rule.positive_body().map(|a| index[&a]).collect(),
            neg: rule
                .negative_body()
                .filter_map(|a| index.get(&a).copied())
                .collect(),
        };
        if local.max_index().is_none() {
            return Ok(Vec::new());
        }
        rules.push(local);
    }

    let mut root: Vec<usize> = (0..derivable.len()).collect();
    fn find(root: &mut [usize], mut i: usize) -> usize {
        while root[i] != i {
            root[i] = root[root[i]];
            i = root[i];
        }
        i
    }
    for rule in &rules {
        let mut atoms = rule.head.iter().chain(&rule.pos).chain(&rule.neg);
        let first = find(&mut root, *atoms.next().unwrap());
        for &i in atoms {
            let r = find(&mut root, i);
            root[r] = first;
        }
    }
    let mut parts: BTreeMap<usize, (Vec<usize>, Vec<&LocalRule>)> = BTreeMap::new();
    for i in 0..derivable.len() {
        let r = find(&mut root, i);
        parts.entry(r).or_default().0.push(i);
    }
    for rule in &rules {
        let r = find(&mut root, rule.max_index().unwrap());
        parts.get_mut(&r).unwrap().1.push(rule);
    }
    if let Some(size) = parts
        .values()
        .map(|(atoms, _)| atoms.len())
        .filter(|&n| n > cap)
        .max()
    {
        return Err(Error::BruteForceCapExceeded {
            what: "answer set enumeration",
            size,
            cap,
        });
    }

    let mut found: Vec<Interpretation> = vec![Interpretation::new()];
    for (atoms, part_rules) in parts.values() {
        let sets = part_answer_sets(atoms, part_rules);
        if sets.is_empty() {
            return Ok(Vec::new());
        }
        let mut next = Vec::with_capacity(found.len() * sets.len());
        for base in &found {
            for set in &sets {
                next.push(
                    base.iter()
                        .chain(set.iter().map(|&i| &derivable[i]))
                        .copied()
                        .collect(),
                );
            }
        }
        found = next;
    }
    found.sort();
    Ok(found)
}

/// Answer sets of one part, as sets of indices from `atoms`.
fn part_answer_sets(atoms: &[usize], rules: &[&LocalRule]) -> Vec<Vec<usize>> {
    let local: BTreeMap<usize, usize> = atoms.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let remap = |v: &[usize]| v.iter().map(|i| local[i]).collect();
    let rules: Vec<LocalRule> = rules
        .iter()
        .map(|r| LocalRule {
            head: remap(&r.head),
            pos: remap(&r.pos),
            neg: remap(&r.neg),
        })
        .collect();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); atoms.len()];
    for (i, rule) in rules.iter().enumerate() {
        buckets[rule.max_index().unwrap()].push(i);
    }
    let mut found = Vec::new();
    let mut value = vec![false; atoms.len()];
    enumerate_models(0, &mut value, &rules, &buckets, &mut |model| {
        if is_minimal(model, &rules) {
            found.push(
                (0..model.len())
                    .filter(|&k| model[k])
                    .map(|k| atoms[k])
                    .collect(),
            );
        }
    });
    found
}

fn enumerate_models(
    depth: usize,
    value: &mut Vec<bool>,
    rules: &[LocalRule],
    buckets: &[Vec<usize>],
    emit: &mut impl FnMut(&[bool]),
) {
    if depth == value.len() {
        emit(value);
        return;
    }
    for v in [false, true] {
        value[depth] = v;
        if buckets[depth].iter().all(|&r| !rules[r].violated(value)) {
            enumerate_models(depth + 1, value, rules, buckets, emit);
        }
    }
    value[depth] = false;
}

/// Whether the model `model` of the program is a minimal model of its reduct.
fn is_minimal(model: &[bool], rules: &[LocalRule]) -> bool {
    // Reduct rules that can fire inside `model`, heads restricted to `model`.
    let reduct: Vec<(Vec<usize>, &[usize])> = rules
        .iter()
        .filter(|r| r.neg.iter().all(|&i| !model[i]) && r.pos.iter().all(|&i| model[i]))
        .map(|r| {
            (
                r.head.iter().copied().filter(|&i| model[i]).collect(),
                r.pos.as_slice(),
            )
        })
        .collect();

    if reduct.iter().all(|(head, _)| head.len() <= 1) {
        let mut least = vec![false; model.len()];
        loop {
            let mut changed = false;
            for (head, pos) in &reduct {
                if let Some(&h) = head.first() {
                    if !least[h] && pos.iter().all(|&i| least[i]) {
                        least[h] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        return least == model;
    }

    // Search for a model of the reduct strictly inside `model`.
    let members: Vec<usize> = (0..model.len()).filter(|&i| model[i]).collect();
    let mut sub = vec![false; model.len()];
    !smaller_model_exists(0, &members, &mut sub, &reduct)
}

fn smaller_model_exists(
    depth: usize,
    members: &[usize],
    sub: &mut Vec<bool>,
    reduct: &[(Vec<usize>, &[usize])],
) -> bool {
    if depth == members.len() {
        let strict = members.iter().any(|&i| !sub[i]);
        return strict
            && reduct
                .iter()
                .all(|(head, pos)| !pos.iter().all(|&i| sub[i]) || head.iter().any(|&h| sub[h]));
    }
    let atom = members[depth];
    for v in [false, true] {
        sub[atom] = v;
        if smaller_model_exists(depth + 1, members, sub, reduct) {
            sub[atom] = false;
            return true;
        }
    }
    sub[atom] = false;
    false
}

/// Truth value of `not inner` (negated when `outer_negated`) under `wvi`, or
/// `None` when the atom lies outside its domain.
pub fn evaluate_epistemic(outer_negated: bool, inner: Literal, wvi: &Wvi) -> Option<bool> {
    wvi.value(inner.atom)?;
    let not_inner = !wvi.contains(inner);
    Some(not_inner != outer_negated)
}

/// Epistemic reduct: epistemic literals over atoms of the domain become
/// truth constants, and rules are simplified accordingly.
pub fn epistemic_reduct(program: &Program, wvi: &Wvi) -> Program {
    let rules = program
        .rules
        .iter()
        .filter_map(|rule| reduce_rule(rule, wvi))
        .collect();
    program.with_rules(rules)
}

/// The reduct of one rule, or `None` when a body element became false.
pub fn reduce_rule(rule: &Rule, wvi: &Wvi) -> Option<Rule> {
    let mut body = Vec::with_capacity(rule.body.len());
    for &elem in &rule.body {
        match elem {
            BodyElement::Epistemic {
                outer_negated,
                inner,
            } => match evaluate_epistemic(outer_negated, inner, wvi) {
                Some(false) => return None,
                Some(true) => {}
                None => body.push(elem),
            },
            BodyElement::Objective(_) => body.push(elem),
        }
    }
    Some(Rule {
        head: rule.head.clone(),
        body,
    })
}

/// `Π ⊔ I`: constraints forcing a world view to agree with `wvi`.
pub fn adjoin_wvi(program: &Program, wvi: &Wvi) -> Program {
    let mut rules = program.rules.clone();
    rules.extend(adjoin_rules(wvi));
    program.with_rules(rules)
}

pub(crate) fn adjoin_rules(wvi: &Wvi) -> Vec<Rule> {
    let mut rules = Vec::new();
    for &atom in wvi.domain() {
        match wvi.value(atom).flatten() {
            Some(positive) => rules.push(Rule::constraint(vec![BodyElement::not_known(Literal {
                atom,
                positive,
            })])),
            None => {
                rules.push(Rule::constraint(vec![BodyElement::not_possible(
                    Literal::pos(atom),
                )]));
                rules.push(Rule::constraint(vec![BodyElement::not_possible(
                    Literal::neg(atom),
                )]));
            }
        }
    }
    rules
}

/// Whether `wvi` is compatible with the set of interpretations `sets`.
pub fn check_compatibility(wvi: &Wvi, sets: &[Interpretation]) -> bool {
    if sets.is_empty() {
        return false;
    }
    wvi.domain().iter().all(|&atom| {
        let inside = sets.iter().filter(|s| s.contains(&atom)).count();
        match wvi.value(atom).flatten() {
            Some(true) => inside == sets.len(),
            Some(false) => inside == 0,
            None => inside > 0 && inside < sets.len(),
        }
    })
}

/// Odometer over the three-valued guesses for `atoms`, first atom slowest,
/// values in the order undecided, true, false.
pub fn guesses(atoms: &[Atom]) -> impl Iterator<Item = Wvi> + '_ {
    const VALUES: [Option<bool>; 3] = [None, Some(true), Some(false)];
    let total = 3usize.pow(atoms.len() as u32);
    (0..total).map(move |mut code| {
        let mut wvi = Wvi::new();
        for &atom in atoms.iter().rev() {
            wvi.set(atom, VALUES[code % 3]);
            code /= 3;
        }
        wvi
    })
}

fn check_epistemic_cap(program: &Program, caps: Caps) -> Result<Vec<Atom>> {
    let eats: Vec<Atom> = program.epistemic_atoms().into_iter().collect();
    if eats.len() > caps.epistemic {
        return Err(Error::BruteForceCapExceeded {
            what: "world view enumeration",
            size: eats.len(),
            cap: caps.epistemic,
        });
    }
    Ok(eats)
}

/// All world views, each over all atoms of the program.
pub fn world_views_bruteforce(program: &Program) -> Result<Vec<Wvi>> {
    world_views_capped(program, Caps::default())
}

pub fn world_views_capped(program: &Program, caps: Caps) -> Result<Vec<Wvi>> {
    let eats = check_epistemic_cap(program, caps)?;
    let atoms = program.atoms();
    let mut views = Vec::new();
    for guess in guesses(&eats) {
        let reduct = epistemic_reduct(program, &guess);
        let sets = answer_sets_capped(&reduct, caps.atoms)?;
        if sets.is_empty() {
            continue;
        }
        let mut wvi = guess;
        for &atom in &atoms {
            if wvi.value(atom).is_some() {
                continue;
            }
            let inside = sets.iter().filter(|s| s.contains(&atom)).count();
            let value = if inside == sets.len() {
                Some(true)
            } else if inside == 0 {
                Some(false)
            } else {
                None
            };
            wvi.set(atom, value);
        }
        if check_compatibility(&wvi, &sets) {
            views.push(wvi);
        }
    }
    Ok(views)
}

/// Plausibility: the purely epistemic rules reduce to a program with an answer
/// set. Rules mentioning atoms outside the domain of `wvi` are ignored.
pub fn is_plausible(wvi: &Wvi, program: &Program) -> bool {
    let pure: Vec<Rule> = program
        .rules
        .iter()
        .filter(|r| r.is_purely_epistemic())
        .filter(|r| r.body.iter().all(|e| wvi.value(e.atom()).is_some()))
        .cloned()
        .collect();
    let reduct = epistemic_reduct(&program.with_rules(pure), wvi);
    !answer_sets_capped(&reduct, usize::MAX)
        .expect("reduct of purely epistemic rules is plain")
        .is_empty()
}

/// Number of plausible interpretations over the epistemic atoms.
pub fn count_plausible_bruteforce(program: &Program) -> Result<Count> {
    let eats = check_epistemic_cap(program, Caps::default())?;
    Ok(BigUint::from(
        guesses(&eats).filter(|g| is_plausible(g, program)).count(),
    ))
}

/// Query acceptance of a world view: positive literals must be known,
/// negative literals must not have their atom known true.
pub fn satisfies_query(view: &Wvi, query: &Wvi) -> bool {
    query.literals().all(|lit| {
        let known_true = view.value(lit.atom) == Some(Some(true));
        known_true == lit.positive
    })
}

/// Whether `view` agrees with `w` on every atom of `w`'s domain, treating
/// atoms outside the program as known false.
pub fn extends(view: &Wvi, w: &Wvi) -> bool {
    w.domain()
        .iter()
        .all(|&a| view.value(a).unwrap_or(Some(false)) == w.value(a).flatten())
}

pub fn count_elp_bruteforce(program: &Program, query: &Wvi) -> Result<Count> {
    Ok(BigUint::from(
        world_views_bruteforce(program)?
            .iter()
            .filter(|v| satisfies_query(v, query))
            .count(),
    ))
}

/// Counts the world views of `program ⊔ w`, and those among them accepting
/// `query`, with caps `caps`.
pub fn count_extending(
    program: &Program,
    w: &Wvi,
    query: Option<&Wvi>,
    caps: Caps,
) -> Result<(Count, Count)> {
    let mut total = BigUint::zero();
    let mut accepted = BigUint::zero();
    for view in world_views_capped(program, caps)? {
        if !extends(&view, w) {
            continue;
        }
        total += 1u32;
        if query.is_none_or(|q| satisfies_query(&view, q)) {
            accepted += 1u32;
        }
    }
    Ok((total, accepted))
}

pub fn prob_bruteforce(program: &Program, query: &Wvi) -> Result<Probability> {
    let (total, accepted) = count_extending(program, &Wvi::new(), Some(query), Caps::default())?;
    if total.is_zero() {
        return Err(Error::NoWorldViews);
    }
    Ok(Probability::new(accepted, total))
}

/// Exact probability from counts, or `NoWorldViews` for a zero denominator.
pub fn ratio(accepted: Count, total: Count) -> Result<Probability> {
    if total.is_zero() {
        Err(Error::NoWorldViews)
    } else {
        Ok(Probability::new(accepted, total))
    }
}
