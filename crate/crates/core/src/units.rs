//! QUDT-style unit registry with linear conversion.
//!
//! A unit converts to its dimension's base unit as
//! `base = value * multiplier + offset`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::graph::{Literal, PrefixMap, StoreError, Term, TripleStore};
use crate::vocab::{self, QUDT, XSD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnitError {
    #[error("unit {0} is already registered")]
    Duplicate(String),
    #[error("cannot convert {from} ({from_dim}) to {to} ({to_dim})")]
    DimensionMismatch {
        from: String,
        from_dim: String,
        to: String,
        to_dim: String,
    },
    #[error("unit {id}: conversion multiplier must be positive and finite, got {value}")]
    BadMultiplier { id: String, value: f64 },
    #[error("unit registry line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Dimension tag such as `mass-per-volume`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dimension(String);

impl Dimension {
    pub fn new(tag: &str) -> Self {
        Dimension(tag.trim().to_lowercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `mass-per-volume` -> `MassPerVolumeUnit`.
    pub fn qudt_class(&self) -> String {
        let mut out = String::new();
        for part in self.0.split(['-', '_', ' ']).filter(|p| !p.is_empty()) {
            let mut cs = part.chars();
            if let Some(c) = cs.next() {
                out.extend(c.to_uppercase());
                out.push_str(cs.as_str());
            }
        }
        out.push_str("Unit");
        out
    }

    fn is_derived(&self) -> bool {
        self.0.contains("-per-")
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitDef {
    /// Full IRI.
    pub id: String,
    pub label: String,
    pub abbreviation: String,
    pub multiplier: f64,
    pub offset: f64,
    pub dimension: Dimension,
    pub symbol: String,
}

impl UnitDef {
    /// Milligram per litre as defined for effect concentrations.
    pub fn milligram_per_liter() -> Self {
        UnitDef {
            id: format!("{}MilligramPerLiter", vocab::ET),
            label: "Milligram per Liter".into(),
            abbreviation: "mg/L".into(),
            multiplier: 0.000001,
            offset: 0.0,
            dimension: Dimension::new("mass-per-volume"),
            symbol: "mg/dm^3".into(),
        }
    }
}

/// Renders a decimal the way unit definitions write it: never in exponent
/// form, always with a fractional part (`1e-6` -> `0.000001`, `0` -> `0.0`).
pub fn decimal_lexical(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') || !v.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}

/// `((value * from.multiplier + from.offset) - to.offset) / to.multiplier`.
pub fn convert(value: f64, from: &UnitDef, to: &UnitDef) -> Result<f64, UnitError> {
    if from.dimension != to.dimension {
        return Err(UnitError::DimensionMismatch {
            from: from.abbreviation.clone(),
            from_dim: from.dimension.to_string(),
            to: to.abbreviation.clone(),
            to_dim: to.dimension.to_string(),
        });
    }
    Ok(((value * from.multiplier + from.offset) - to.offset) / to.multiplier)
}

#[derive(Debug, Clone, Default)]
pub struct UnitRegistry {
    units: BTreeMap<String, UnitDef>,
}

impl UnitRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding only the mg/L definition.
    pub fn seeded() -> Self {
        let mut reg = Self::new();
        reg.insert(UnitDef::milligram_per_liter())
            .expect("seed unit is valid");
        reg
    }

    fn insert(&mut self, def: UnitDef) -> Result<(), UnitError> {
        if !(def.multiplier.is_finite() && def.multiplier > 0.0) {
            return Err(UnitError::BadMultiplier {
                id: def.id,
                value: def.multiplier,
            });
        }
        if self.units.contains_key(&def.id) {
            return Err(UnitError::Duplicate(def.id));
        }
        self.units.insert(def.id.clone(), def);
        Ok(())
    }

    /// Registers `def` and emits its definition block into `store`.
    pub fn register_unit(&mut self, def: UnitDef, store: &mut TripleStore) -> Result<usize, UnitError> {
        self.insert(def.clone())?;
        Ok(emit_definition(&def, store)?)
    }

    /// Emits definition blocks for every registered unit.
    pub fn emit_all(&self, store: &mut TripleStore) -> Result<usize, UnitError> {
        let mut added = 0;
        for def in self.units.values() {
            added += emit_definition(def, store)?;
        }
        Ok(added)
    }

    /// Adds every unit of `other`. Identical definitions already present are
    /// skipped; a different definition under the same id is a duplicate.
    pub fn merge(&mut self, other: UnitRegistry) -> Result<(), UnitError> {
        for (id, def) in other.units {
            match self.units.get(&id) {
                Some(existing) if *existing == def => {}
                _ => self.insert(def)?,
            }
        }
        Ok(())
    }

    /// Emits the definition block of one registered unit.
    pub fn emit_unit(&self, id: &str, store: &mut TripleStore) -> Result<usize, UnitError> {
        match self.units.get(id) {
            Some(def) => Ok(emit_definition(def, store)?),
            None => Ok(0),
        }
    }

    pub fn get(&self, id: &str) -> Option<&UnitDef> {
        self.units.get(id)
    }

    pub fn by_abbreviation(&self, abbreviation: &str) -> Option<&UnitDef> {
        let abbreviation = abbreviation.trim();
        self.units.values().find(|u| u.abbreviation == abbreviation)
    }

    /// The unit with multiplier 1 and offset 0 in `dimension`, if any.
    pub fn base_unit(&self, dimension: &Dimension) -> Option<&UnitDef> {
        self.units
            .values()
            .find(|u| &u.dimension == dimension && u.multiplier == 1.0 && u.offset == 0.0)
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &UnitDef> {
        self.units.values()
    }

    /// Loads `id, label, abbreviation, multiplier, offset, dimension, symbol`
    /// rows. Ids may be curies. A header row starting with `id` is skipped.
    pub fn from_tsv(text: &str, prefixes: &PrefixMap) -> Result<Self, UnitError> {
        let mut reg = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            let fmt_err = |message: String| UnitError::Format { line: i + 1, message };
            if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("id\t")) {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() != 7 {
                return Err(fmt_err(format!("expected 7 columns, found {}", cols.len())));
            }
            let id = match prefixes.resolve(cols[0]) {
                Ok(Term::Iri(iri)) => iri,
                Ok(_) => unreachable!("resolve yields IRIs"),
                Err(e) => return Err(fmt_err(e.to_string())),
            };
            let num = |s: &str, what: &str| {
                s.parse::<f64>()
                    .map_err(|_| fmt_err(format!("{what} {s:?} is not a number")))
            };
            reg.insert(UnitDef {
                id,
                label: cols[1].to_string(),
                abbreviation: cols[2].to_string(),
                multiplier: num(cols[3], "multiplier")?,
                offset: num(cols[4], "offset")?,
                dimension: Dimension::new(cols[5]),
                symbol: cols[6].to_string(),
            })?;
        }
        Ok(reg)
    }
}

fn emit_definition(def: &UnitDef, store: &mut TripleStore) -> Result<usize, StoreError> {
    let subject = Term::iri(def.id.clone())?;
    let string = |s: &str| Term::Literal(Literal::typed(s, format!("{XSD}string")).expect("xsd IRI"));
    let decimal = |v: f64| Term::Literal(Literal::typed(decimal_lexical(v), format!("{XSD}decimal")).expect("xsd IRI"));
    let qudt = |local: &str| vocab::iri(QUDT, local);

    let mut triples = vec![(vocab::rdf_type(), qudt(&def.dimension.qudt_class()))];
    if def.dimension.is_derived() {
        triples.push((vocab::rdf_type(), qudt("SIDerivedUnit")));
        triples.push((vocab::rdf_type(), qudt("DerivedUnit")));
    }
    triples.extend([
        (vocab::rdfs_label(), string(&def.label)),
        (qudt("abbreviation"), string(&def.abbreviation)),
        (qudt("conversionMultiplier"), decimal(def.multiplier)),
        (qudt("conversionOffset"), decimal(def.offset)),
        (qudt("symbol"), string(&def.symbol)),
    ]);
    let mut added = 0;
    for (p, o) in triples {
        added += usize::from(store.add(subject.clone(), p, o)?);
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::serialize_ntriples;

    fn microgram_per_liter() -> UnitDef {
        UnitDef {
            id: format!("{}MicrogramPerLiter", vocab::ET),
            label: "Microgram per Liter".into(),
            abbreviation: "ug/L".into(),
            multiplier: 1e-9,
            offset: 0.0,
            dimension: Dimension::new("mass-per-volume"),
            symbol: "ug/dm^3".into(),
        }
    }

    fn mole_per_liter() -> UnitDef {
        UnitDef {
            id: format!("{}MolePerLiter", vocab::ET),
            label: "Mole per Liter".into(),
            abbreviation: "mol/L".into(),
            multiplier: 1000.0,
            offset: 0.0,
            dimension: Dimension::new("amount-of-substance-per-volume"),
            symbol: "mol/dm^3".into(),
        }
    }

    #[test]
    fn milligram_per_liter_block() {
        let mut reg = UnitRegistry::new();
        let mut store = TripleStore::new();
        let n = reg.register_unit(UnitDef::milligram_per_liter(), &mut store).unwrap();
        assert_eq!(n, 8);
        let nt = serialize_ntriples(&store);
        assert!(nt.contains(
            "<https://cfpub.epa.gov/ecotox/MilligramPerLiter> <http://qudt.org/schema/qudt#conversionMultiplier> \"0.000001\"^^<http://www.w3.org/2001/XMLSchema#decimal> ."
        ));
        assert!(nt.contains("\"0.0\"^^<http://www.w3.org/2001/XMLSchema#decimal>"));
        assert!(nt.contains("<http://qudt.org/schema/qudt#MassPerVolumeUnit>"));
        assert!(nt.contains("\"mg/L\"^^<http://www.w3.org/2001/XMLSchema#string>"));
    }

    #[test]
    fn duplicate_registration() {
        let mut reg = UnitRegistry::seeded();
        let err = reg
            .register_unit(UnitDef::milligram_per_liter(), &mut TripleStore::new())
            .unwrap_err();
        assert!(matches!(err, UnitError::Duplicate(_)));
    }

    #[test]
    fn conversions() {
        let mg = UnitDef::milligram_per_liter();
        assert_eq!(convert(5.0, &mg, &mg).unwrap(), 5.0);
        let ug = convert(1.0, &mg, &microgram_per_liter()).unwrap();
        assert!((ug - 1000.0).abs() <= 1e-12 * 1000.0);
        assert!(matches!(
            convert(1.0, &mg, &mole_per_liter()),
            Err(UnitError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn offsets_apply() {
        let kelvin = UnitDef {
            id: "http://qudt.org/vocab/unit#K".into(),
            label: "Kelvin".into(),
            abbreviation: "K".into(),
            multiplier: 1.0,
            offset: 0.0,
            dimension: Dimension::new("temperature"),
            symbol: "K".into(),
        };
        let celsius = UnitDef {
            id: "http://qudt.org/vocab/unit#DEG_C".into(),
            label: "Degree Celsius".into(),
            abbreviation: "degC".into(),
            multiplier: 1.0,
            offset: 273.15,
            dimension: Dimension::new("temperature"),
            symbol: "°C".into(),
        };
        assert!((convert(25.0, &celsius, &kelvin).unwrap() - 298.15).abs() < 1e-9);
        assert!((convert(0.0, &kelvin, &celsius).unwrap() + 273.15).abs() < 1e-9);
    }

    #[test]
    fn k_units_emit_k_blocks() {
        let mut reg = UnitRegistry::new();
        let mut store = TripleStore::new();
        for def in [UnitDef::milligram_per_liter(), microgram_per_liter(), mole_per_liter()] {
            reg.register_unit(def, &mut store).unwrap();
        }
        let multipliers = store.match_pattern(None, Some(&vocab::iri(QUDT, "conversionMultiplier")), None);
        assert_eq!(multipliers.len(), 3);
    }

    #[test]
    fn lexical_decimals() {
        assert_eq!(decimal_lexical(0.000001), "0.000001");
        assert_eq!(decimal_lexical(0.0), "0.0");
        assert_eq!(decimal_lexical(1e-9), "0.000000001");
        assert_eq!(decimal_lexical(1000.0), "1000.0");
    }

    #[test]
    fn tsv_registry() {
        let text = "id\tlabel\tabbreviation\tmultiplier\toffset\tdimension\tsymbol\n\
                    et:MilligramPerLiter\tMilligram per Liter\tmg/L\t0.000001\t0.0\tmass-per-volume\tmg/dm^3\n\
                    et:GramPerLiter\tGram per Liter\tg/L\t0.001\t0\tmass-per-volume\tg/dm^3\n\
                    et:KilogramPerCubicMeter\tKilogram per Cubic Meter\tkg/m^3\t1\t0\tmass-per-volume\tkg/m^3\n";
        let reg = UnitRegistry::from_tsv(text, &PrefixMap::with_defaults()).unwrap();
        assert_eq!(reg.len(), 3);
        assert_eq!(reg.by_abbreviation("g/L").unwrap().multiplier, 0.001);
        assert_eq!(
            reg.base_unit(&Dimension::new("mass-per-volume")).unwrap().abbreviation,
            "kg/m^3"
        );
        assert!(UnitRegistry::from_tsv("et:X\ta\tb\t0\t0\td\ts\n", &PrefixMap::with_defaults()).is_err());
    }
}
