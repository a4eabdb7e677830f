//! Physical constants and decibel helpers.

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Room temperature used for every thermal-noise term unless overridden.
pub const ROOM_TEMPERATURE_K: f64 = 298.0;

/// Charge of one microampere-hour in coulombs.
pub const COULOMBS_PER_UAH: f64 = 3.6e-3;

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * db_to_linear(dbm)
}

#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    linear_to_db(watts / 1e-3)
}

#[inline]
pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

/// Charge in coulombs of a battery rated in milliampere-hours.
#[inline]
pub fn mah_to_coulombs(mah: f64) -> f64 {
    mah * 3.6
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_points() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(3.0) - 1.995_262_3).abs() < 1e-6);
        assert!((dbm_to_watts(-43.0) - 50.118_723e-9).abs() < 1e-14);
        assert_eq!(mah_to_coulombs(230.0), 828.0);
    }

    proptest! {
        #[test]
        fn db_round_trip(db in -200.0f64..200.0) {
            let back = linear_to_db(db_to_linear(db));
            prop_assert!((back - db).abs() <= 1e-12 * db.abs().max(1.0));
            let lin = db_to_linear(db);
            let lin_back = db_to_linear(linear_to_db(lin));
            prop_assert!(((lin_back - lin) / lin).abs() <= 1e-12);
        }

        #[test]
        fn dbm_round_trip(dbm in -150.0f64..40.0) {
            let back = watts_to_dbm(dbm_to_watts(dbm));
            prop_assert!((back - dbm).abs() <= 1e-12 * dbm.abs().max(1.0));
        }
    }
}
