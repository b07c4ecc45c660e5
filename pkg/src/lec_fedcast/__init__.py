"""Federated LSTM forecasting simulator for local energy communities."""

__version__ = "0.1.0"
