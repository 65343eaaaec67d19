from .app import create_app, serve
from .auth import Authenticator, sign_headers, signing_message

__all__ = ["create_app", "serve", "Authenticator", "sign_headers", "signing_message"]
