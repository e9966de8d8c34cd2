pub mod cindex;
pub mod km;
pub mod simulate;

/// Input problems exit with 2, failures while computing with 3.
pub enum Failure {
    Input(anyhow::Error),
    Compute(anyhow::Error),
}

pub type Outcome<T = ()> = Result<T, Failure>;

pub trait Classify<T> {
    fn input(self) -> Outcome<T>;
    fn compute(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> Outcome<T> {
        self.map_err(|e| Failure::Input(e.into()))
    }

    fn compute(self) -> Outcome<T> {
        self.map_err(|e| Failure::Compute(e.into()))
    }
}
