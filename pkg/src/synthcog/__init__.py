"""Seeded simulator and benchmark harness for synthetic cognitive-decline
interaction data: users, sessions, biomarker features and early detection."""

__version__ = "0.1.0"
