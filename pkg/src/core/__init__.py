# Core modules
from .qubit_algebra import HermitianOperator, PauliString, QuantumState
from .hamiltonian_builder import HamiltonianPair, PartitionInstance, ScheduleSpec
from .spectral_analyzer import GapProfile, GapScalingFit, SpectralAnalyzer
from .adiabatic_engine import AdiabaticEngine, EvolutionResult, GroundSpaceProjector
from .tomography_lab import MeasurementRecord, TomographyLab
from .reality_oracle import PartitionSolution, RealityOracle, SpinAssignment
from .morphism_ledger import LedgerReport, MorphismCost, MorphismLedger

__all__ = [
    'HermitianOperator',
    'PauliString',
    'QuantumState',
    'HamiltonianPair',
    'PartitionInstance',
    'ScheduleSpec',
    'GapProfile',
    'GapScalingFit',
    'SpectralAnalyzer',
    'AdiabaticEngine',
    'EvolutionResult',
    'GroundSpaceProjector',
    'MeasurementRecord',
    'TomographyLab',
    'PartitionSolution',
    'RealityOracle',
    'SpinAssignment',
    'LedgerReport',
    'MorphismCost',
    'MorphismLedger'
]
