"""
Core module for the OWPN capacity laboratory.
Contains parameter objects, unit conventions, errors and settings management.
"""
