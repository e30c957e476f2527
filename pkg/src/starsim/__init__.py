"""State-aware data randomization for 3D TLC/QLC NAND: device model, write
transforms, controller datapath model and a trace-driven SSD emulator."""

__version__ = "0.1.0"
