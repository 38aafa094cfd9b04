"""Service-time fault injection."""

from src.faults.injector import FAULT_MODES, FaultEntry, FaultLog, corrupt_panel

__all__ = ["FAULT_MODES", "FaultEntry", "FaultLog", "corrupt_panel"]
