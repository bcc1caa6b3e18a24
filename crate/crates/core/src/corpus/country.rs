//! The 21 surveyed countries and the eight dialectal areas they group into.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A Spanish-speaking country, serialized as its ISO 3166-1 alpha-2 code.
///
/// Variant order is the canonical order used for question generation and
/// for every country-level table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Country {
    #[serde(rename = "ES")]
    Spain,
    #[serde(rename = "GQ")]
    EquatorialGuinea,
    #[serde(rename = "CU")]
    Cuba,
    #[serde(rename = "DO")]
    DominicanRepublic,
    #[serde(rename = "PR")]
    PuertoRico,
    #[serde(rename = "MX")]
    Mexico,
    #[serde(rename = "GT")]
    Guatemala,
    #[serde(rename = "HN")]
    Honduras,
    #[serde(rename = "SV")]
    ElSalvador,
    #[serde(rename = "NI")]
    Nicaragua,
    #[serde(rename = "CR")]
    CostaRica,
    #[serde(rename = "PA")]
    Panama,
    #[serde(rename = "CO")]
    Colombia,
    #[serde(rename = "VE")]
    Venezuela,
    #[serde(rename = "EC")]
    Ecuador,
    #[serde(rename = "PE")]
    Peru,
    #[serde(rename = "BO")]
    Bolivia,
    #[serde(rename = "CL")]
    Chile,
    #[serde(rename = "PY")]
    Paraguay,
    #[serde(rename = "UY")]
    Uruguay,
    #[serde(rename = "AR")]
    Argentina,
}

impl Country {
    pub const ALL: [Country; 21] = [
        Country::Spain,
        Country::EquatorialGuinea,
        Country::Cuba,
        Country::DominicanRepublic,
        Country::PuertoRico,
        Country::Mexico,
        Country::Guatemala,
        Country::Honduras,
        Country::ElSalvador,
        Country::Nicaragua,
        Country::CostaRica,
        Country::Panama,
        Country::Colombia,
        Country::Venezuela,
        Country::Ecuador,
        Country::Peru,
        Country::Bolivia,
        Country::Chile,
        Country::Paraguay,
        Country::Uruguay,
        Country::Argentina,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Country::Spain => "ES",
            Country::EquatorialGuinea => "GQ",
            Country::Cuba => "CU",
            Country::DominicanRepublic => "DO",
            Country::PuertoRico => "PR",
            Country::Mexico => "MX",
            Country::Guatemala => "GT",
            Country::Honduras => "HN",
            Country::ElSalvador => "SV",
            Country::Nicaragua => "NI",
            Country::CostaRica => "CR",
            Country::Panama => "PA",
            Country::Colombia => "CO",
            Country::Venezuela => "VE",
            Country::Ecuador => "EC",
            Country::Peru => "PE",
            Country::Bolivia => "BO",
            Country::Chile => "CL",
            Country::Paraguay => "PY",
            Country::Uruguay => "UY",
            Country::Argentina => "AR",
        }
    }

    /// English name, as used in report tables.
    pub fn name(self) -> &'static str {
        match self {
            Country::Spain => "Spain",
            Country::EquatorialGuinea => "Equatorial Guinea",
            Country::Cuba => "Cuba",
            Country::DominicanRepublic => "Dominican Republic",
            Country::PuertoRico => "Puerto Rico",
            Country::Mexico => "Mexico",
            Country::Guatemala => "Guatemala",
            Country::Honduras => "Honduras",
            Country::ElSalvador => "El Salvador",
            Country::Nicaragua => "Nicaragua",
            Country::CostaRica => "Costa Rica",
            Country::Panama => "Panama",
            Country::Colombia => "Colombia",
            Country::Venezuela => "Venezuela",
            Country::Ecuador => "Ecuador",
            Country::Peru => "Peru",
            Country::Bolivia => "Bolivia",
            Country::Chile => "Chile",
            Country::Paraguay => "Paraguay",
            Country::Uruguay => "Uruguay",
            Country::Argentina => "Argentina",
        }
    }

    /// Spanish exonym substituted into prompts.
    pub fn spanish_name(self) -> &'static str {
        match self {
            Country::Spain => "España",
            Country::EquatorialGuinea => "Guinea Ecuatorial",
            Country::Cuba => "Cuba",
            Country::DominicanRepublic => "República Dominicana",
            Country::PuertoRico => "Puerto Rico",
            Country::Mexico => "México",
            Country::Guatemala => "Guatemala",
            Country::Honduras => "Honduras",
            Country::ElSalvador => "El Salvador",
            Country::Nicaragua => "Nicaragua",
            Country::CostaRica => "Costa Rica",
            Country::Panama => "Panamá",
            Country::Colombia => "Colombia",
            Country::Venezuela => "Venezuela",
            Country::Ecuador => "Ecuador",
            Country::Peru => "Perú",
            Country::Bolivia => "Bolivia",
            Country::Chile => "Chile",
            Country::Paraguay => "Paraguay",
            Country::Uruguay => "Uruguay",
            Country::Argentina => "Argentina",
        }
    }

    pub fn area(self) -> DialectalArea {
        match self {
            Country::Spain => DialectalArea::Spain,
            Country::EquatorialGuinea => DialectalArea::EquatorialGuinea,
            Country::Cuba | Country::DominicanRepublic | Country::PuertoRico => {
                DialectalArea::Antilles
            }
            Country::Mexico
            | Country::Guatemala
            | Country::Honduras
            | Country::ElSalvador
            | Country::Nicaragua => DialectalArea::MexicoCentralAmerica,
            Country::CostaRica | Country::Panama | Country::Venezuela => {
                DialectalArea::ContinentalCaribe
            }
            Country::Colombia | Country::Ecuador | Country::Peru | Country::Bolivia => {
                DialectalArea::Andes
            }
            Country::Chile => DialectalArea::Chile,
            Country::Paraguay | Country::Uruguay | Country::Argentina => {
                DialectalArea::LaPlataRiver
            }
        }
    }

    /// Looks a country up by ISO code or English name (case-insensitive).
    pub fn lookup(s: &str) -> Option<Country> {
        let s = s.trim();
        Country::ALL
            .into_iter()
            .find(|c| c.code().eq_ignore_ascii_case(s) || c.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Country {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown country `{0}`")]
pub struct UnknownCountry(pub String);

impl FromStr for Country {
    type Err = UnknownCountry;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Country::lookup(s).ok_or_else(|| UnknownCountry(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DialectalArea {
    Spain,
    EquatorialGuinea,
    Antilles,
    MexicoCentralAmerica,
    ContinentalCaribe,
    Andes,
    Chile,
    LaPlataRiver,
}

impl DialectalArea {
    pub const ALL: [DialectalArea; 8] = [
        DialectalArea::Spain,
        DialectalArea::EquatorialGuinea,
        DialectalArea::Antilles,
        DialectalArea::MexicoCentralAmerica,
        DialectalArea::ContinentalCaribe,
        DialectalArea::Andes,
        DialectalArea::Chile,
        DialectalArea::LaPlataRiver,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DialectalArea::Spain => "Spain",
            DialectalArea::EquatorialGuinea => "Equatorial Guinea",
            DialectalArea::Antilles => "Antilles",
            DialectalArea::MexicoCentralAmerica => "Mexico & Central America",
            DialectalArea::ContinentalCaribe => "Continental Caribe",
            DialectalArea::Andes => "Andes",
            DialectalArea::Chile => "Chile",
            DialectalArea::LaPlataRiver => "La Plata River",
        }
    }

    pub fn members(self) -> Vec<Country> {
        Country::ALL
            .into_iter()
            .filter(|c| c.area() == self)
            .collect()
    }
}

impl fmt::Display for DialectalArea {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn areas_partition_countries() {
        let counts: Vec<usize> = DialectalArea::ALL.iter().map(|a| a.members().len()).collect();
        assert_eq!(counts, vec![1, 1, 3, 5, 3, 4, 1, 3]);
        assert_eq!(counts.iter().sum::<usize>(), 21);

        let mut seen = HashSet::new();
        for area in DialectalArea::ALL {
            for c in area.members() {
                assert!(seen.insert(c), "{c} in two areas");
            }
        }
        assert_eq!(seen.len(), 21);
    }

    #[test]
    fn codes_are_distinct_and_round_trip() {
        let codes: HashSet<&str> = Country::ALL.iter().map(|c| c.code()).collect();
        assert_eq!(codes.len(), 21);
        for c in Country::ALL {
            assert_eq!(c.code().parse::<Country>().unwrap(), c);
            assert_eq!(c.name().parse::<Country>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.code()));
        }
        assert!("US".parse::<Country>().is_err());
    }
}
