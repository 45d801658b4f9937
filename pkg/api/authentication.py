"""
API key authentication for the simulation endpoints.

Keys come from WGMSIM_API_KEYS (comma-separated) and are re-read on every
request, so rotating a key only needs the environment updated. With no
keys configured every authenticated endpoint refuses access; status/ stays
public. Keys are compared in constant time and only a short fingerprint of
a key ever reaches the logs.
"""
import hashlib
import hmac
import logging
import os

from rest_framework import authentication, exceptions

logger = logging.getLogger(__name__)

API_KEYS_ENV = 'WGMSIM_API_KEYS'


def configured_api_keys():
    return [key.strip() for key in os.environ.get(API_KEYS_ENV, '').split(',') if key.strip()]


def key_fingerprint(api_key):
    return hashlib.sha256(api_key.encode('utf-8')).hexdigest()[:8]


class APIKeyAuthentication(authentication.BaseAuthentication):
    """
    Simulation clients send their key as either

        Authorization: Bearer <api_key>
    or
        X-API-Key: <api_key>

    A request without a key falls through to the permission check (401).
    """

    def authenticate(self, request):
        auth_header = request.META.get('HTTP_AUTHORIZATION', '')
        if auth_header.startswith('Bearer '):
            api_key = auth_header[len('Bearer '):].strip()
        else:
            api_key = request.META.get('HTTP_X_API_KEY', '').strip()

        if not api_key:
            return None

        if self.is_valid_api_key(api_key):
            return (APIKeyUser(key_fingerprint(api_key)), api_key)

        logger.warning(f"Rejected API key {key_fingerprint(api_key)} for {request.path}")
        raise exceptions.AuthenticationFailed('Invalid API key')

    def authenticate_header(self, request):
        return 'Bearer'

    def is_valid_api_key(self, api_key):
        valid_keys = configured_api_keys()
        if not valid_keys:
            raise exceptions.AuthenticationFailed(
                f'No API keys configured; set {API_KEYS_ENV} on the server.'
            )
        candidate = api_key.encode('utf-8')
        return any(hmac.compare_digest(candidate, key.encode('utf-8')) for key in valid_keys)


class APIKeyUser:
    """A simulation client, identified by the fingerprint of its key."""

    def __init__(self, fingerprint=''):
        self.fingerprint = fingerprint

    @property
    def is_authenticated(self):
        return True

    @property
    def is_anonymous(self):
        return False

    def __str__(self):
        return f'api-key:{self.fingerprint}'
