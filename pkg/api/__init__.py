"""API app for receiving data from local network."""
