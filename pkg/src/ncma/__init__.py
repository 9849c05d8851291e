"""Network-coded multiple access: PNC + MUD decoding, MAC-layer bridging and
a Monte Carlo throughput harness for power-balanced NOMA uplinks."""
from .analysis import ThroughputRecord, rate_gain, sic_sinr, tally_throughput
from .bridge import IntegrityError, MacLedger, mac_bridge, phy_bridge, run_slot_pipeline
from .channel import ChannelRealization, SlotObservation, draw_channel, transmit_slot
from .detect import DecodedEquation, joint_llr, run_decoder_bank, sic_decode
from .fec import DEFAULT_CODE, ConvCodeSpec, conv_encode, viterbi_decode
from .harness import ResultRow, ScenarioConfig, emit_results, run_scenario
from .macode import MacCodeSpec, Message, mac_decode, mac_encode, mac_reencode
from .modem import (BPSK, QPSK_SPLIT, QPSK_STANDARD, ModulationScheme, SymbolBlock,
                    bpsk_modulate, pnc_bit_map, qpsk_split_modulate, qpsk_standard_modulate)
from .profiles import PROFILES, EquationLabel, Profile, get_profile
from .rag import GroupPlan, detect_preambles, group_users, run_rag, zc_generate

__version__ = "0.1.0"
