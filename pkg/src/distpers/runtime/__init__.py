"""Pipeline runtime: node loop, transports, wire frames, metrics, result gathering."""
from .driver import DistributedRun, RunError, run_distributed
from .gather import gather_results
from .metrics import MetricsLedger, build_report, dump_report
from .monitor import OwnershipMonitor
from .node import MatrixProvider, NodeOutput, run_node
from .transport import InProcessNetwork, ProtocolError, TransportError
from .wire import DecodeError, Package, decode_package, encode_package

__all__ = [
    "DecodeError",
    "DistributedRun",
    "InProcessNetwork",
    "MatrixProvider",
    "MetricsLedger",
    "NodeOutput",
    "OwnershipMonitor",
    "Package",
    "ProtocolError",
    "RunError",
    "TransportError",
    "build_report",
    "decode_package",
    "dump_report",
    "encode_package",
    "gather_results",
    "run_distributed",
    "run_node",
]
