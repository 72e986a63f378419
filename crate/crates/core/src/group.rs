//! Finite groups given by Cayley tables, the three presented families, free
//! group words and conjugacy classes.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("{family} needs n >= {min}, got {n}")]
    ParameterTooSmall { family: &'static str, n: usize, min: usize },
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("relator {relator} evaluates to element {value}, not the identity")]
    RelatorViolation { relator: String, value: usize },
    #[error("generator index {0} is out of range")]
    BadGenerator(usize),
    #[error("cannot parse word {0:?}: letters must be a-z (inverse: A-Z)")]
    BadWord(String),
    #[error("cannot read Cayley table: {0}")]
    Input(String),
}

/// A word in the free group on the generators: `(generator index, ±1)` letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupWord {
    pub letters: Vec<(usize, i8)>,
}

impl GroupWord {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn letter(generator: usize, exponent: i8) -> Self {
        debug_assert!(exponent == 1 || exponent == -1);
        Self {
            letters: vec![(generator, exponent)],
        }
    }

    /// `generator^k`, negative `k` meaning inverse letters.
    pub fn power(generator: usize, k: i64) -> Self {
        let e = if k < 0 { -1 } else { 1 };
        Self {
            letters: vec![(generator, e); k.unsigned_abs() as usize],
        }
    }

    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        GroupWord { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Parses words such as `"abab"` or `"aBab"`: lowercase letter `k` is
    /// generator `k - 'a'`, uppercase is its inverse.
    pub fn parse(text: &str) -> Result<Self, GroupError> {
        let mut letters = Vec::with_capacity(text.len());
        for c in text.chars().filter(|c| !c.is_whitespace()) {
            match c {
                'a'..='z' => letters.push((c as usize - 'a' as usize, 1)),
                'A'..='Z' => letters.push((c as usize - 'A' as usize, -1)),
                _ => return Err(GroupError::BadWord(text.to_string())),
            }
        }
        Ok(Self { letters })
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for &(g, e) in &self.letters {
            let base = if e > 0 { b'a' } else { b'A' };
            write!(f, "{}", (base + g as u8) as char)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Dihedral,
    Dicyclic,
    Semidihedral,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Dihedral, Family::Dicyclic, Family::Semidihedral];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Dihedral => "dihedral",
            Family::Dicyclic => "dicyclic",
            Family::Semidihedral => "semidihedral",
        }
    }

    /// Order of the cyclic subgroup `<a>`.
    pub fn cyclic_order(&self, n: usize) -> usize {
        match self {
            Family::Dihedral => n,
            Family::Dicyclic => 2 * n,
            Family::Semidihedral => 4 * n,
        }
    }

    pub fn group_label(&self, n: usize) -> String {
        match self {
            Family::Dihedral => format!("D_{}", 2 * n),
            Family::Dicyclic => format!("T_{}", 4 * n),
            Family::Semidihedral => format!("SD_{}", 8 * n),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dihedral" | "d" => Ok(Family::Dihedral),
            "dicyclic" | "t" => Ok(Family::Dicyclic),
            "semidihedral" | "semi-dihedral" | "sd" => Ok(Family::Semidihedral),
            other => Err(format!("unknown family {other:?}")),
        }
    }
}

/// Metadata kept for groups built from a family presentation: elements are
/// `a^i b^j`, indexed `i + m*j` with `m` the order of `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyInfo {
    pub family: Family,
    pub n: usize,
    pub cyclic_order: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    cayley: Vec<usize>,
    inverse: Vec<usize>,
    identity: usize,
    generators: Vec<usize>,
    relators: Vec<GroupWord>,
    names: Vec<String>,
    /// Word in the generators for every element (the `a^i b^j` normal form
    /// for family groups, a breadth-first word otherwise).
    normal_words: Vec<GroupWord>,
    family: Option<FamilyInfo>,
}

const FULL_ASSOCIATIVITY_LIMIT: usize = 64;

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.cayley[g * self.order + h]
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn conjugate(&self, x: usize, by: usize) -> usize {
        self.mul(self.mul(by, x), self.inv(by))
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn relators(&self) -> &[GroupWord] {
        &self.relators
    }

    pub fn name(&self, g: usize) -> &str {
        &self.names[g]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn normal_word(&self, g: usize) -> &GroupWord {
        &self.normal_words[g]
    }

    pub fn family(&self) -> Option<FamilyInfo> {
        self.family
    }

    pub fn is_abelian(&self) -> bool {
        self.generators
            .iter()
            .all(|&x| self.generators.iter().all(|&y| self.mul(x, y) == self.mul(y, x)))
    }

    pub fn label(&self) -> String {
        match self.family {
            Some(info) => info.family.group_label(info.n),
            None => format!("G_{}", self.order),
        }
    }

    /// Index of `a^i b^j` in a family group.
    pub fn family_element(&self, i: i64, j: usize) -> usize {
        let info = self.family.expect("family_element on a group without a family presentation");
        let m = info.cyclic_order as i64;
        i.rem_euclid(m) as usize + info.cyclic_order * (j % 2)
    }

    pub fn power(&self, g: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, g))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn dihedral(n: usize) -> Result<Self, GroupError> {
        if n < 3 {
            return Err(GroupError::ParameterTooSmall {
                family: "dihedral",
                n,
                min: 3,
            });
        }
        // a^n, b^2, (ab)^2
        let relators = vec![
            GroupWord::power(0, n as i64),
            GroupWord::power(1, 2),
            GroupWord::parse("abab").unwrap(),
        ];
        Ok(Self::metacyclic(Family::Dihedral, n, n, n - 1, 0, relators))
    }

    /// Dicyclic group `T_4n`. `n = 1` (a cyclic group of order 4) needs
    /// `allow_degenerate`.
    pub fn dicyclic(n: usize, allow_degenerate: bool) -> Result<Self, GroupError> {
        let min = if allow_degenerate { 1 } else { 2 };
        if n < min {
            return Err(GroupError::ParameterTooSmall {
                family: "dicyclic",
                n,
                min,
            });
        }
        let m = 2 * n;
        // a^{2n}, a^n b^2, a b^{-1} a b
        let relators = vec![
            GroupWord::power(0, m as i64),
            GroupWord::power(0, n as i64).concat(&GroupWord::power(1, 2)),
            GroupWord::parse("aBab").unwrap(),
        ];
        Ok(Self::metacyclic(Family::Dicyclic, n, m, m - 1, n, relators))
    }

    /// Semi-dihedral group `SD_8n`; `n = 1` gives the abelian group
    /// `C_4 x C_2`.
    pub fn semidihedral(n: usize) -> Result<Self, GroupError> {
        if n < 1 {
            return Err(GroupError::ParameterTooSmall {
                family: "semidihedral",
                n,
                min: 1,
            });
        }
        let m = 4 * n;
        // a^{4n}, b^2, a^{2n+1} b a b
        let relators = vec![
            GroupWord::power(0, m as i64),
            GroupWord::power(1, 2),
            GroupWord::power(0, 2 * n as i64 + 1).concat(&GroupWord::parse("bab").unwrap()),
        ];
        Ok(Self::metacyclic(Family::Semidihedral, n, m, 2 * n - 1, 0, relators))
    }

    pub fn from_family(family: Family, n: usize, allow_degenerate: bool) -> Result<Self, GroupError> {
        match family {
            Family::Dihedral => Self::dihedral(n),
            Family::Dicyclic => Self::dicyclic(n, allow_degenerate),
            Family::Semidihedral => Self::semidihedral(n),
        }
    }

    /// Groups `{a^i b^j}` with `|a| = m`, `b a = a^twist b` and `b^2 = a^square`.
    fn metacyclic(
        family: Family,
        n: usize,
        m: usize,
        twist: usize,
        square: usize,
        relators: Vec<GroupWord>,
    ) -> Self {
        let order = 2 * m;
        // b^j a^k = a^{twist^j k} b^j
        let product = |(i, j): (usize, usize), (k, l): (usize, usize)| -> usize {
            let moved = if j == 0 { k } else { (twist * k) % m };
            let mut exp = i + moved;
            let mut bj = j + l;
            if bj == 2 {
                exp += square;
                bj = 0;
            }
            exp % m + m * bj
        };
        let split = |g: usize| (g % m, g / m);
        let mut cayley = vec![0; order * order];
        for g in 0..order {
            for h in 0..order {
                cayley[g * order + h] = product(split(g), split(h));
            }
        }
        let names = (0..order).map(|g| element_name(g % m, g / m)).collect();
        let normal_words = (0..order)
            .map(|g| GroupWord::power(0, (g % m) as i64).concat(&GroupWord::power(1, (g / m) as i64)))
            .collect();
        let inverse = inverse_table(&cayley, order, 0).expect("family tables are groups");
        let group = FiniteGroup {
            order,
            cayley,
            inverse,
            identity: 0,
            generators: vec![1 % order, m],
            relators,
            names,
            normal_words,
            family: Some(FamilyInfo {
                family,
                n,
                cyclic_order: m,
            }),
        };
        debug_assert!(group.relators.iter().all(|r| group.evaluate_word(r) == 0));
        group
    }

    /// Builds a validated group from a Cayley table. When `generators` is
    /// empty a generating set is chosen greedily (smallest index outside the
    /// subgroup generated so far).
    pub fn from_cayley(
        table: Vec<Vec<usize>>,
        generators: Vec<usize>,
        relators: Vec<GroupWord>,
    ) -> Result<Self, GroupError> {
        let order = table.len();
        if order == 0 {
            return Err(GroupError::NotAGroup("empty table".into()));
        }
        let mut cayley = Vec::with_capacity(order * order);
        for (r, row) in table.iter().enumerate() {
            if row.len() != order {
                return Err(GroupError::NotAGroup(format!(
                    "row {r} has {} entries, expected {order}",
                    row.len()
                )));
            }
            for &x in row {
                if x >= order {
                    return Err(GroupError::NotAGroup(format!("entry {x} in row {r} is out of range")));
                }
            }
            cayley.extend_from_slice(row);
        }
        let at = |g: usize, h: usize| cayley[g * order + h];

        let identity = (0..order)
            .find(|&e| (0..order).all(|g| at(e, g) == g && at(g, e) == g))
            .ok_or_else(|| GroupError::NotAGroup("no identity element".into()))?;
        let inverse = inverse_table(&cayley, order, identity)?;
        check_associativity(&cayley, order)?;

        let generators = if generators.is_empty() {
            greedy_generators(&cayley, order, identity)
        } else {
            if let Some(&g) = generators.iter().find(|&&g| g >= order) {
                return Err(GroupError::BadGenerator(g));
            }
            generators
        };
        let normal_words = bfs_words(&cayley, order, identity, &generators).ok_or_else(|| {
            GroupError::NotAGroup("the given generators do not generate the group".into())
        })?;

        let group = FiniteGroup {
            order,
            cayley,
            inverse,
            identity,
            generators,
            relators: vec![],
            names: (0..order).map(|g| format!("g{g}")).collect(),
            normal_words,
            family: None,
        };
        for relator in &relators {
            if let Some(&(g, _)) = relator.letters.iter().find(|(g, _)| *g >= group.generators.len()) {
                return Err(GroupError::BadGenerator(g));
            }
            let value = group.evaluate_word(relator);
            if value != group.identity {
                return Err(GroupError::RelatorViolation {
                    relator: relator.to_string(),
                    value,
                });
            }
        }
        Ok(FiniteGroup { relators, ..group })
    }

    /// Reads a Cayley table: CSV (`N` lines of `N` zero-based indices) or a
    /// JSON document `{"table": [[...]], "generators": [...], "relators": ["abab", ...]}`.
    pub fn from_table_file(path: &Path) -> Result<Self, GroupError> {
        let text = std::fs::read_to_string(path).map_err(|e| GroupError::Input(format!("{}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
            || text.trim_start().starts_with('{');
        if is_json {
            Self::from_json_table(&text)
        } else {
            Self::from_cayley(parse_csv_table(&text)?, vec![], vec![])
        }
    }

    pub fn from_json_table(text: &str) -> Result<Self, GroupError> {
        #[derive(Deserialize)]
        struct TableDoc {
            table: Vec<Vec<usize>>,
            #[serde(default)]
            generators: Vec<usize>,
            #[serde(default)]
            relators: Vec<String>,
        }
        let doc: TableDoc = serde_json::from_str(text).map_err(|e| GroupError::Input(e.to_string()))?;
        let relators = doc
            .relators
            .iter()
            .map(|r| GroupWord::parse(r))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_cayley(doc.table, doc.generators, relators)
    }

    pub fn evaluate_word(&self, word: &GroupWord) -> usize {
        word.letters.iter().fold(self.identity, |acc, &(g, e)| {
            let x = self.generators[g];
            self.mul(acc, if e > 0 { x } else { self.inv(x) })
        })
    }

    /// The cyclic subgroup generated by `g`, sorted.
    pub fn cyclic_part(&self, g: usize) -> Vec<usize> {
        let mut out = vec![self.identity];
        let mut x = g;
        while x != self.identity {
            out.push(x);
            x = self.mul(x, g);
        }
        out.sort_unstable();
        out
    }

    pub fn conjugacy_classes(&self) -> ConjugacyClasses {
        let mut seen = vec![false; self.order];
        let mut classes = Vec::new();
        for start in 0..self.order {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut class = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &g in &self.generators {
                    let y = self.conjugate(x, g);
                    if !seen[y] {
                        seen[y] = true;
                        class.push(y);
                        queue.push_back(y);
                    }
                }
            }
            class.sort_unstable();
            classes.push(class);
        }
        // stable: central classes first, each part ordered by representative
        classes.sort_by_key(|c| (c.len() > 1, c[0]));
        let representatives = classes.iter().map(|c| c[0]).collect();
        let central_count = classes.iter().filter(|c| c.len() == 1).count();
        ConjugacyClasses {
            class_count: classes.len(),
            classes,
            representatives,
            central_count,
        }
    }

    pub fn format_element_list(&self, elements: &[usize]) -> String {
        let names: Vec<&str> = elements.iter().map(|&g| self.name(g)).collect();
        format!("{{{}}}", names.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjugacyClasses {
    pub classes: Vec<Vec<usize>>,
    pub representatives: Vec<usize>,
    /// Number of singleton classes; they come first.
    pub central_count: usize,
    pub class_count: usize,
}

impl ConjugacyClasses {
    pub fn sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    /// Elements of the non-central classes minus their representatives.
    pub fn non_representatives(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.classes[self.central_count..]
            .iter()
            .flat_map(|c| c[1..].iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

fn element_name(i: usize, j: usize) -> String {
    let a = match i {
        0 => String::new(),
        1 => "a".to_string(),
        _ => format!("a^{i}"),
    };
    match (a.is_empty(), j) {
        (true, 0) => "1".to_string(),
        (_, 0) => a,
        (_, _) => format!("{a}b"),
    }
}

fn inverse_table(cayley: &[usize], order: usize, identity: usize) -> Result<Vec<usize>, GroupError> {
    (0..order)
        .map(|g| {
            (0..order)
                .find(|&h| cayley[g * order + h] == identity && cayley[h * order + g] == identity)
                .ok_or_else(|| GroupError::NotAGroup(format!("element {g} has no inverse")))
        })
        .collect()
}

fn check_associativity(cayley: &[usize], order: usize) -> Result<(), GroupError> {
    let at = |g: usize, h: usize| cayley[g * order + h];
    let check = |x: usize, y: usize, z: usize| {
        if at(at(x, y), z) == at(x, at(y, z)) {
            Ok(())
        } else {
            Err(GroupError::NotAGroup(format!("associativity fails for ({x}, {y}, {z})")))
        }
    };
    if order <= FULL_ASSOCIATIVITY_LIMIT {
        for x in 0..order {
            for y in 0..order {
                for z in 0..order {
                    check(x, y, z)?;
                }
            }
        }
    } else {
        // deterministic pseudo-random sample of 10 N^2 triples
        let mut state: u64 = 0x9E37_79B9_7F4A_7C15 ^ order as u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % order as u64) as usize
        };
        for _ in 0..10 * order * order {
            let (x, y, z) = (next(), next(), next());
            check(x, y, z)?;
        }
    }
    Ok(())
}

fn greedy_generators(cayley: &[usize], order: usize, identity: usize) -> Vec<usize> {
    let mut generators = Vec::new();
    let mut inside = vec![false; order];
    inside[identity] = true;
    for g in 0..order {
        if inside[g] {
            continue;
        }
        generators.push(g);
        // closure of the subgroup under right multiplication by generators
        let mut members: Vec<usize> = (0..order).filter(|&x| inside[x]).collect();
        let mut i = 0;
        while i < members.len() {
            let x = members[i];
            for &s in &generators {
                let y = cayley[x * order + s];
                if !inside[y] {
                    inside[y] = true;
                    members.push(y);
                }
            }
            i += 1;
        }
    }
    generators
}

fn bfs_words(cayley: &[usize], order: usize, identity: usize, generators: &[usize]) -> Option<Vec<GroupWord>> {
    let mut words: Vec<Option<GroupWord>> = vec![None; order];
    words[identity] = Some(GroupWord::empty());
    let mut queue = VecDeque::from([identity]);
    while let Some(x) = queue.pop_front() {
        for (k, &s) in generators.iter().enumerate() {
            let y = cayley[x * order + s];
            if words[y].is_none() {
                let mut w = words[x].clone().unwrap();
                w.letters.push((k, 1));
                words[y] = Some(w);
                queue.push_back(y);
            }
        }
    }
    words.into_iter().collect()
}

pub fn parse_csv_table(text: &str) -> Result<Vec<Vec<usize>>, GroupError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    reader
        .records()
        .enumerate()
        .map(|(r, record)| {
            let record = record.map_err(|e| GroupError::Input(e.to_string()))?;
            record
                .iter()
                .map(|cell| {
                    cell.parse::<usize>()
                        .map_err(|_| GroupError::Input(format!("row {}: bad entry {cell:?}", r + 1)))
                })
                .collect()
        })
        .collect()
}
