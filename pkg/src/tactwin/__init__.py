"""Digital twin for capacitively sensorized, pneumatically actuated soft bodies."""

__version__ = "0.1.0"
