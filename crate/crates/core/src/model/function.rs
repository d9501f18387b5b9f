use super::Alphabet;
use crate::error::{Error, Result};

/// Total deterministic map between finite alphabets, with its preimage
/// partition precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct DetFunction {
    domain: Alphabet,
    codomain: Alphabet,
    table: Vec<usize>,
    // preimages[y] lists the domain symbols mapped to y, ascending; empty off the image
    preimages: Vec<Vec<usize>>,
}

impl DetFunction {
    /// Builds from a positional table: `table[x]` is the image of domain symbol `x`.
    pub fn new(domain: Alphabet, codomain: Alphabet, table: Vec<usize>) -> Result<Self> {
        if table.len() != domain.len() {
            if table.len() < domain.len() {
                return Err(Error::PartialTable(domain.label(table.len()).to_string()));
            }
            return Err(Error::LengthMismatch { expected: domain.len(), found: table.len() });
        }
        let mut preimages = vec![Vec::new(); codomain.len()];
        for (x, &y) in table.iter().enumerate() {
            codomain.check(y)?;
            preimages[y].push(x);
        }
        Ok(DetFunction { domain, codomain, table, preimages })
    }

    /// Builds from `(domain label, codomain label)` pairs. Every domain
    /// symbol must appear exactly once.
    pub fn from_pairs<'a, I>(domain: Alphabet, codomain: Alphabet, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut table: Vec<Option<usize>> = vec![None; domain.len()];
        for (from, to) in pairs {
            let x = domain.index_of(from)?;
            let y = codomain.index_of(to)?;
            if table[x].replace(y).is_some() {
                return Err(Error::InvalidParameter(format!("symbol {from:?} mapped twice")));
            }
        }
        let table = table
            .iter()
            .enumerate()
            .map(|(x, y)| y.ok_or_else(|| Error::PartialTable(domain.label(x).to_string())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, codomain, table)
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        let table = (0..alphabet.len()).collect();
        Self::new(alphabet.clone(), alphabet, table).expect("identity is total")
    }

    pub fn constant(domain: Alphabet, codomain: Alphabet, value: usize) -> Result<Self> {
        let table = vec![value; domain.len()];
        Self::new(domain, codomain, table)
    }

    pub fn domain(&self) -> &Alphabet {
        &self.domain
    }

    pub fn codomain(&self) -> &Alphabet {
        &self.codomain
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    /// Per-symbol application to a block.
    pub fn apply_block(&self, xseq: &[usize]) -> Result<Vec<usize>> {
        xseq.iter().map(|&x| self.domain.check(x).map(|x| self.table[x])).collect()
    }

    /// `f^{-1}(y)`, ascending. Empty when `y` is not in the image.
    pub fn preimage(&self, y: usize) -> &[usize] {
        &self.preimages[y]
    }

    /// Codomain symbols with a non-empty preimage.
    pub fn image(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.codomain.len()).filter(|&y| !self.preimages[y].is_empty())
    }

    /// The preimage classes `{f^{-1}(y) : y in image}`.
    pub fn partition(&self) -> Vec<(usize, &[usize])> {
        self.image().map(|y| (y, self.preimage(y))).collect()
    }

    pub fn is_injective(&self) -> bool {
        self.preimages.iter().all(|p| p.len() <= 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn and() -> DetFunction {
        let a = Alphabet::new(["00", "01", "10", "11"]).unwrap();
        DetFunction::from_pairs(a, Alphabet::binary(), [("00", "0"), ("01", "0"), ("10", "0"), ("11", "1")]).unwrap()
    }

    #[test]
    fn and_partition() {
        let f = and();
        assert_eq!(f.partition(), vec![(0, &[0usize, 1, 2][..]), (1, &[3usize][..])]);
        assert!(!f.is_injective());
    }

    #[test]
    fn identity_partition_is_singletons() {
        let f = DetFunction::identity(Alphabet::binary());
        assert_eq!(f.partition(), vec![(0, &[0usize][..]), (1, &[1usize][..])]);
        assert!(f.is_injective());
    }

    #[test]
    fn constant_partition_is_whole_domain() {
        let f = DetFunction::constant(Alphabet::numeric(3).unwrap(), Alphabet::binary(), 0).unwrap();
        assert_eq!(f.partition(), vec![(0, &[0usize, 1, 2][..])]);
    }

    #[test]
    fn partial_table_is_rejected() {
        let a = Alphabet::new(["00", "01", "10", "11"]).unwrap();
        let err = DetFunction::from_pairs(a, Alphabet::binary(), [("00", "0"), ("11", "1")]);
        assert_eq!(err, Err(Error::PartialTable("01".into())));
    }

    #[test]
    fn apply_block_cases() {
        let f = and();
        assert_eq!(f.apply_block(&[0, 3, 1]).unwrap(), vec![0, 1, 0]);
        assert_eq!(f.apply_block(&[]).unwrap(), Vec::<usize>::new());
        assert!(matches!(f.apply_block(&[4]), Err(Error::UnknownSymbol(_))));
        let id = DetFunction::identity(Alphabet::numeric(3).unwrap());
        assert_eq!(id.apply_block(&[2, 0, 1, 1]).unwrap(), vec![2, 0, 1, 1]);
    }
}
