"""
Uplink IoT Co-existence Scheduler
Simulates uplink sub-carrier sharing between NB-IoT, LTE-M and 5G-NR devices in an
interference-limited multi-cell network and compares baseline, benchmark and DRL schedulers.
"""

__version__ = "0.1.0"
