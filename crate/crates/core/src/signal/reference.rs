use crate::{Error, Result};

/// Subtracts the mean of all channels from each channel.
pub fn common_average_reference_in_place(frame: &mut [f64]) -> Result<()> {
    if frame.len() < 2 {
        return Err(Error::contract(format!(
            "common average reference needs at least 2 channels, got {}",
            frame.len()
        )));
    }
    let mean = frame.iter().sum::<f64>() / frame.len() as f64;
    frame.iter_mut().for_each(|x| *x -= mean);
    Ok(())
}

pub fn common_average_reference(frame: &[f64]) -> Result<Vec<f64>> {
    let mut out = frame.to_vec();
    common_average_reference_in_place(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(common_average_reference(&[1.0, 2.0, 3.0]).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(common_average_reference(&[5.0; 4]).unwrap(), vec![0.0; 4]);
        assert!(common_average_reference(&[1.0]).is_err());
        assert!(common_average_reference(&[]).is_err());
    }

    proptest! {
        #[test]
        fn zero_sum_and_idempotent(frame in proptest::collection::vec(-1e3f64..1e3, 2..16)) {
            let once = common_average_reference(&frame).unwrap();
            prop_assert!(once.iter().sum::<f64>().abs() < 1e-9);
            let twice = common_average_reference(&once).unwrap();
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
